#include "floret/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "floret/error.hpp"

namespace floret {

using nlohmann::json;

std::string format_decimal(double x) {
  std::ostringstream out;
  out << std::setprecision(6) << x;
  return out.str();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix data length does not match its dimensions");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  }
  return m;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json rational_to_json(const Rational& r) {
  return {{"numerator", boost::multiprecision::numerator(r).str()},
          {"denominator", boost::multiprecision::denominator(r).str()}};
}

std::vector<std::string> leaf_labels(const SequentialTree& tree) {
  std::vector<std::string> out;
  for (const auto& leaf : tree.leaves()) out.push_back(leaf.label);
  return out;
}

// Fixed-width table writer: first column left-aligned, rest right-aligned.
class Table {
 public:
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str(const std::string& indent = "  ") const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream out;
    for (const auto& r : rows_) {
      out << indent;
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c == 0) {
          out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
        } else {
          out << "  " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
        }
      }
      out << '\n';
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace

// ---------------------------------------------------------------------------

json structure_to_json(const Model& model) {
  const StructureSummary s = summarize(model);
  json florets = json::array();
  for (std::size_t f = 0; f < s.florets.size(); ++f) {
    const auto& fs = s.florets[f];
    florets.push_back({{"id", fs.id},
                       {"outcomes", model.tree.florets()[f].outcomes},
                       {"nodes", fs.nodes},
                       {"overall_effect", fs.overall_effect}});
  }
  json out = {{"I", s.leaves},
              {"K", s.nodes},
              {"J", s.parameters},
              {"F", s.florets.size()},
              {"leaves", leaf_labels(model.tree)},
              {"florets", florets}};
  out["df"] = s.df ? json(*s.df) : json(nullptr);
  return out;
}

std::string structure_to_text(const Model& model) {
  const StructureSummary s = summarize(model);
  std::ostringstream out;
  out << "leaves (I):       " << s.leaves << '\n'
      << "nodes (K):        " << s.nodes << '\n'
      << "florets (F):      " << s.florets.size() << '\n'
      << "parameters (J):   " << s.parameters << '\n'
      << "degrees of freedom: " << (s.df ? std::to_string(*s.df) : "negative (over-parameterized)")
      << "\n\n";
  Table t;
  t.row({"floret", "outcomes", "nodes", "overall effect"});
  for (const auto& fs : s.florets) {
    std::string nodes;
    for (auto k : fs.nodes) nodes += (nodes.empty() ? "" : ",") + std::to_string(k);
    t.row({fs.id, std::to_string(fs.outcomes), nodes, fs.overall_effect ? "yes" : "no"});
  }
  out << t.str();
  out << "\nleaf order:\n";
  for (std::size_t i = 0; i < model.tree.leaf_count(); ++i) {
    out << "  " << (i + 1) << "  " << model.tree.leaves()[i].label << '\n';
  }
  return out.str();
}

json design_matrix_to_json(const Model& model) {
  json rows = json::array();
  for (std::size_t f = 0; f < model.matrix.floret_count(); ++f) {
    const Floret& fl = model.tree.florets()[f];
    for (std::size_t j = 0; j < fl.arity(); ++j) {
      std::vector<int> entries;
      for (std::size_t i = 0; i < model.matrix.cols(); ++i) {
        entries.push_back(model.matrix(model.matrix.block(f).offset + j, i));
      }
      rows.push_back({{"floret", fl.id}, {"outcome", fl.outcomes[j]}, {"entries", entries}});
    }
  }
  return {{"rows", model.matrix.rows()},
          {"cols", model.matrix.cols()},
          {"leaves", leaf_labels(model.tree)},
          {"matrix", rows}};
}

std::string design_matrix_to_text(const Model& model) {
  Table t;
  std::vector<std::string> header{""};
  for (const auto& leaf : model.tree.leaves()) header.push_back(leaf.label);
  t.row(header);
  for (std::size_t f = 0; f < model.matrix.floret_count(); ++f) {
    const Floret& fl = model.tree.florets()[f];
    for (std::size_t j = 0; j < fl.arity(); ++j) {
      std::vector<std::string> row{fl.id + ":" + fl.outcomes[j]};
      for (std::size_t i = 0; i < model.matrix.cols(); ++i) {
        row.push_back(std::to_string(model.matrix(model.matrix.block(f).offset + j, i)));
      }
      t.row(row);
    }
  }
  return t.str("");
}

// ---------------------------------------------------------------------------

FitReport make_fit_report(const Model& model, const ObservedCounts& y) {
  FitReport r;
  r.y = y;
  r.fit = fit_mle(model.matrix, y);
  r.exact = fit_exact(model.matrix, y);
  r.gof = goodness_of_fit(model.matrix, r.fit, y);
  r.proportionality = check_proportionality(model.matrix, r.fit, y);
  if (r.fit.boundary) {
    r.warnings.emplace_back(
        "boundary MLE: some edge probability estimate is 0; covariance, standard errors and "
        "p-values are not reported");
  } else {
    r.covariance = covariance(model.matrix, r.fit.theta_hat);
    r.se = standard_errors(r.fit, model.matrix);
  }
  if (r.gof.small_expected) {
    r.warnings.emplace_back("some fitted counts are below 5; chi-square p-values are approximate");
  }
  return r;
}

json fit_report_to_json(const Model& model, const FitReport& r) {
  const auto& tree = model.tree;
  json out;
  out["model"] = structure_to_json(model);
  out["data"] = {{"counts", std::vector<std::int64_t>(r.y.values().begin(), r.y.values().end())},
                 {"N", r.y.total()}};
  out["boundary"] = r.fit.boundary;
  out["warnings"] = r.warnings;

  json theta = json::array();
  for (std::size_t f = 0; f < tree.floret_count(); ++f) {
    const Floret& fl = tree.florets()[f];
    json estimates = json::array();
    for (std::size_t j = 0; j < fl.arity(); ++j) {
      // Unreduced M_f y / S_f(y), integers.
      json e = {{"outcome", fl.outcomes[j]},
                {"numerator", r.fit.statistics.per_floret[f][j]},
                {"denominator", r.fit.statistics.exposure[f]},
                {"decimal", r.fit.theta_hat(f, j)}};
      estimates.push_back(e);
    }
    theta.push_back({{"floret", fl.id},
                     {"sufficient_statistics", r.fit.statistics.per_floret[f]},
                     {"exposure_size", r.fit.statistics.exposure[f]},
                     {"estimates", estimates}});
  }
  out["theta_hat"] = theta;

  json p = json::array();
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    json e = rational_to_json(r.exact.p_hat[i]);
    e["leaf"] = tree.leaves()[i].label;
    e["decimal"] = r.fit.p_hat(static_cast<Eigen::Index>(i));
    e["fitted_count"] = r.fit.y_hat(static_cast<Eigen::Index>(i));
    p.push_back(e);
  }
  out["p_hat"] = p;
  out["y_hat"] = vector_to_json(r.fit.y_hat);
  out["log_likelihood"] = r.fit.log_likelihood;

  json exposure = json::array();
  for (std::size_t f = 0; f < tree.floret_count(); ++f) {
    const auto& e = r.fit.exposure.florets[f];
    exposure.push_back({{"floret", tree.florets()[f].id},
                        {"observed", e.observed},
                        {"expected", e.expected},
                        {"expected_exact", rational_to_json(r.exact.expected_exposure[f])},
                        {"ratio", e.ratio},
                        {"ratio_exact", rational_to_json(r.exact.exposure_ratio[f])},
                        {"rate", e.rate},
                        {"rate_exact", rational_to_json(r.exact.exposure_rate[f])}});
  }
  out["exposure"] = exposure;

  json prop = json::array();
  for (std::size_t f = 0; f < tree.floret_count(); ++f) {
    const auto& fp = r.proportionality.florets[f];
    json ratios = json::array();
    for (const auto& x : fp.ratios) ratios.push_back(x ? json(*x) : json(nullptr));
    prop.push_back({{"floret", tree.florets()[f].id},
                    {"ratios", ratios},
                    {"gamma", fp.gamma},
                    {"max_relative_deviation", fp.max_relative_deviation},
                    {"passes", fp.passes}});
  }
  out["proportionality"] = prop;

  json gof = {{"x2", r.gof.x2},
              {"g2", r.gof.g2},
              {"df", r.gof.df},
              {"small_expected_counts", r.gof.small_expected}};
  gof["p_x2"] = r.gof.p_x2 ? json(*r.gof.p_x2) : json(nullptr);
  gof["p_g2"] = r.gof.p_g2 ? json(*r.gof.p_g2) : json(nullptr);
  out["gof"] = gof;

  if (r.covariance) {
    out["phi_theta"] = matrix_to_json(r.covariance->phi_theta);
    out["phi_p"] = matrix_to_json(r.covariance->phi_p);
    out["exposure_rates_at_theta_hat"] = vector_to_json(r.covariance->exposure_rates);
  } else {
    out["phi_theta"] = nullptr;
    out["phi_p"] = nullptr;
  }
  if (r.se) {
    json se = json::array();
    for (std::size_t f = 0; f < tree.floret_count(); ++f) {
      se.push_back({{"floret", tree.florets()[f].id}, {"se", vector_to_json(r.se->theta[f])}});
    }
    out["se_theta"] = se;
    out["se_p"] = vector_to_json(r.se->p);
  } else {
    out["se_theta"] = nullptr;
    out["se_p"] = nullptr;
  }
  return out;
}

std::string fit_report_to_text(const Model& model, const FitReport& r) {
  const auto& tree = model.tree;
  std::ostringstream out;
  out << "N = " << r.y.total() << ", I = " << tree.leaf_count() << ", F = " << tree.floret_count()
      << ", df = " << r.gof.df << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';

  out << "\nedge probabilities\n";
  Table t;
  t.row({"floret", "outcome", "M_f y", "estimate", "decimal", "se"});
  for (std::size_t f = 0; f < tree.floret_count(); ++f) {
    const Floret& fl = tree.florets()[f];
    for (std::size_t j = 0; j < fl.arity(); ++j) {
      const std::string se =
          r.se ? format_decimal(r.se->theta[f](static_cast<Eigen::Index>(j))) : "-";
      t.row({fl.id, fl.outcomes[j], std::to_string(r.fit.statistics.per_floret[f][j]),
             std::to_string(r.fit.statistics.per_floret[f][j]) + "/" +
                 std::to_string(r.fit.statistics.exposure[f]),
             format_decimal(r.fit.theta_hat(f, j)), se});
    }
  }
  out << t.str();

  out << "\nleaves\n";
  Table l;
  l.row({"leaf", "y", "p_hat", "y_hat", "se(p_hat)"});
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    l.row({tree.leaves()[i].label, std::to_string(r.y[i]), format_decimal(r.fit.p_hat(ii)),
           format_decimal(r.fit.y_hat(ii)), r.se ? format_decimal(r.se->p(ii)) : "-"});
  }
  out << l.str();

  out << "\nexposure\n";
  Table e;
  e.row({"floret", "S_f(y)", "S_f(y_hat)", "ratio", "rate"});
  for (std::size_t f = 0; f < tree.floret_count(); ++f) {
    const auto& x = r.fit.exposure.florets[f];
    e.row({tree.florets()[f].id, std::to_string(x.observed), format_decimal(x.expected),
           format_decimal(x.ratio), format_decimal(x.rate)});
  }
  out << e.str();

  out << "\ngoodness of fit (asymptotic chi-square p-values)\n";
  Table g;
  g.row({"statistic", "value", "df", "p"});
  g.row({"X2", format_decimal(r.gof.x2), std::to_string(r.gof.df),
         r.gof.p_x2 ? format_decimal(*r.gof.p_x2) : "-"});
  g.row({"G2", format_decimal(r.gof.g2), std::to_string(r.gof.df),
         r.gof.p_g2 ? format_decimal(*r.gof.p_g2) : "-"});
  out << g.str();
  out << "\nlog-likelihood kernel: " << format_decimal(r.fit.log_likelihood) << '\n';

  if (r.covariance) {
    out << "\nasymptotic covariance of sqrt(N) theta~_hat\n";
    const Eigen::MatrixXd& phi = r.covariance->phi_theta;
    Table c;
    for (Eigen::Index a = 0; a < phi.rows(); ++a) {
      std::vector<std::string> row{""};
      for (Eigen::Index b = 0; b < phi.cols(); ++b) row.push_back(format_decimal(phi(a, b)));
      c.row(row);
    }
    out << c.str();
  }
  return out.str();
}

// ---------------------------------------------------------------------------

json monte_carlo_to_json(const Model& model, const SimulationConfig& cfg,
                         const MonteCarloReport& report, const MonteCarloCheck& check) {
  json theta0 = json::array();
  for (std::size_t f = 0; f < model.tree.floret_count(); ++f) {
    theta0.push_back({{"floret", model.tree.florets()[f].id},
                      {"values", vector_to_json(cfg.theta0.block(f))}});
  }
  return {
      {"config",
       {{"theta0", theta0},
        {"n", cfg.n},
        {"reps", cfg.reps},
        {"seed", cfg.seed},
        {"sampler", cfg.sampler == Sampler::path ? "path" : "multinomial"}}},
      {"replicates", {{"total", report.reps}, {"used", report.used}, {"boundary", report.boundary}}},
      {"mean_scaled_error", vector_to_json(report.mean_scaled_error)},
      {"covariance", matrix_to_json(report.covariance)},
      {"mean_abs_error", vector_to_json(report.mean_abs_error)},
      {"mean_exposure_ratio", vector_to_json(report.mean_exposure_ratio)},
      {"mean_exposure_rate", vector_to_json(report.mean_exposure_rate)},
      {"mean_x2", report.mean_x2},
      {"mean_g2", report.mean_g2},
      {"sd_x2", report.sd_x2},
      {"sd_g2", report.sd_g2},
      {"df", report.df},
      {"theory",
       {{"phi_theta", matrix_to_json(check.phi_theta)},
        {"expected_exposure_rate", vector_to_json(check.expected_rates)},
        {"covariance_relative_error", check.covariance_error},
        {"covariance_tolerance", MonteCarloCheck::kCovarianceTolerance},
        {"rate_relative_error", vector_to_json(check.rate_error)},
        {"rate_tolerance", MonteCarloCheck::kRateTolerance},
        {"covariance_ok", check.covariance_ok},
        {"rates_ok", check.rates_ok},
        {"pass", check.passes()}}}};
}

std::string monte_carlo_to_text(const Model& model, const SimulationConfig& cfg,
                                const MonteCarloReport& report, const MonteCarloCheck& check) {
  std::ostringstream out;
  out << "replicates: " << report.reps << " (used " << report.used << ", boundary "
      << report.boundary << "), N = " << cfg.n << ", seed = " << cfg.seed << '\n';
  Table t;
  t.row({"check", "empirical", "theory", "rel. error", "tolerance", "verdict"});
  t.row({"cov sqrt(N)(theta~_hat - theta~_0)", "frobenius " + format_decimal(report.covariance.norm()),
         "frobenius " + format_decimal(check.phi_theta.norm()), format_decimal(check.covariance_error),
         format_decimal(MonteCarloCheck::kCovarianceTolerance), check.covariance_ok ? "PASS" : "FAIL"});
  for (std::size_t f = 0; f < model.tree.floret_count(); ++f) {
    const auto ff = static_cast<Eigen::Index>(f);
    const bool ok = check.rate_error(ff) < MonteCarloCheck::kRateTolerance;
    t.row({"exposure rate " + model.tree.florets()[f].id,
           format_decimal(report.mean_exposure_rate(ff)), format_decimal(check.expected_rates(ff)),
           format_decimal(check.rate_error(ff)), format_decimal(MonteCarloCheck::kRateTolerance),
           ok ? "PASS" : "FAIL"});
  }
  out << t.str();
  out << "mean X2 = " << format_decimal(report.mean_x2) << ", mean G2 = "
      << format_decimal(report.mean_g2) << " (df = " << report.df << ")\n";
  out << "verdict: " << (check.passes() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace floret
