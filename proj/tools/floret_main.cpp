// floret: fit multiplicative staged-tree models to sequential-design data.
//
//   floret validate <model>
//   floret matrix   <model>
//   floret fit      <model> <data> [--format json|text] [--strict]
//   floret simulate <model> --theta f:v,... --n N --seed S
//   floret mc-check <model> --theta f:v,... --n N --reps R --seed S
//
// Exit codes: 0 success (any fit quality), 2 usage or validation error,
// 3 boundary MLE when --strict asks for covariance.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "floret/error.hpp"
#include "floret/io.hpp"
#include "floret/rational.hpp"
#include "floret/report.hpp"
#include "floret/simulate.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

double parse_probability(const std::string& text) {
  const std::string t = trim(text);
  if (t.find('/') != std::string::npos) return floret::to_double(floret::parse_rational(t));
  std::size_t used = 0;
  const double v = std::stod(t, &used);
  if (used != t.size()) throw std::invalid_argument("bad number '" + t + "'");
  return v;
}

// Each entry is `floret:v1,v2,...` (several entries may be joined with ';').
// A floret may list all J_f values or only the first J_f - 1, in which case
// the last is 1 minus their sum. Florets not mentioned default to uniform.
floret::ParameterVector parse_theta(const std::vector<std::string>& entries,
                                    const floret::SequentialTree& tree) {
  std::vector<Eigen::VectorXd> blocks;
  for (const auto& f : tree.florets()) {
    blocks.push_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(f.arity()),
                                               1.0 / static_cast<double>(f.arity())));
  }
  std::vector<bool> given(tree.floret_count(), false);
  for (const auto& entry : entries) {
    for (const auto& part : split(entry, ';')) {
      if (trim(part).empty()) continue;
      const auto colon = part.find(':');
      if (colon == std::string::npos) {
        throw floret::DomainError("expected 'floret:v1,v2,...'", "--theta " + part);
      }
      const std::string id = trim(part.substr(0, colon));
      const auto f = tree.floret_index(id);
      if (!f) throw floret::DomainError("unknown floret '" + id + "'", "--theta");
      if (given[*f]) throw floret::DomainError("floret '" + id + "' given twice", "--theta");
      given[*f] = true;
      std::vector<double> values;
      try {
        for (const auto& v : split(part.substr(colon + 1), ',')) values.push_back(parse_probability(v));
      } catch (const std::exception&) {
        throw floret::DomainError("malformed probability list", "--theta " + part);
      }
      const std::size_t arity = tree.florets()[*f].arity();
      Eigen::VectorXd b(static_cast<Eigen::Index>(arity));
      if (values.size() == arity) {
        for (std::size_t j = 0; j < arity; ++j) b(static_cast<Eigen::Index>(j)) = values[j];
      } else if (values.size() + 1 == arity) {
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < arity; ++j) {
          b(static_cast<Eigen::Index>(j)) = values[j];
          sum += values[j];
        }
        b(static_cast<Eigen::Index>(arity - 1)) = 1.0 - sum;
      } else {
        throw floret::DomainError("floret '" + id + "' needs " + std::to_string(arity) +
                                      " (or " + std::to_string(arity - 1) + ") values",
                                  "--theta");
      }
      blocks[*f] = b;
    }
  }
  return floret::ParameterVector(std::move(blocks));
}

floret::Sampler parse_sampler(const std::string& s) {
  return s == "multinomial" ? floret::Sampler::multinomial : floret::Sampler::path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fit floret (staged-tree) models to sequential-design data"};
  app.require_subcommand(1);

  std::string model_path;
  std::string data_path;
  std::string format = "text";
  std::vector<std::string> theta_args;
  std::int64_t n = 0;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  std::string sampler = "path";
  unsigned threads = 0;
  bool strict = false;
  const std::vector<std::string> text_or_json{"text", "json"};

  auto* validate = app.add_subcommand("validate", "Check a model file and print its structure");
  validate->add_option("model", model_path, "Model file (JSON)")->required();
  validate->add_option("--format", format, "Output format")->check(CLI::IsMember(text_or_json));

  auto* matrix = app.add_subcommand("matrix", "Print the design matrix");
  matrix->add_option("model", model_path, "Model file (JSON)")->required();
  matrix->add_option("--format", format, "Output format")->check(CLI::IsMember(text_or_json));

  auto* fit = app.add_subcommand("fit", "Closed-form MLE, exposure, covariance and goodness of fit");
  fit->add_option("model", model_path, "Model file (JSON)")->required();
  fit->add_option("data", data_path, "Counts: JSON array or leaf_path,count CSV")->required();
  fit->add_option("--format", format, "Output format")->check(CLI::IsMember(text_or_json));
  fit->add_flag("--strict", strict, "Exit with code 3 when the MLE is on the boundary");

  auto* simulate = app.add_subcommand("simulate", "Draw leaf counts from the model");
  simulate->add_option("model", model_path, "Model file (JSON)")->required();
  simulate->add_option("--theta", theta_args, "Edge probabilities, floret:v1,v2,...");
  simulate->add_option("--n", n, "Number of subjects")->required()->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", seed, "Random seed")->envname("FLORET_SEED");
  simulate->add_option("--sampler", sampler, "path or multinomial")
      ->check(CLI::IsMember({"path", "multinomial"}));
  std::string counts_format = "json";
  simulate->add_option("--format", counts_format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* mc = app.add_subcommand("mc-check", "Monte Carlo check of the asymptotic covariance");
  std::int64_t mc_n = 10000;
  mc->add_option("model", model_path, "Model file (JSON)")->required();
  mc->add_option("--theta", theta_args, "True edge probabilities, floret:v1,v2,...");
  mc->add_option("--n", mc_n, "Subjects per replicate")->check(CLI::PositiveNumber);
  mc->add_option("--reps", reps, "Replicates")->check(CLI::PositiveNumber);
  mc->add_option("--seed", seed, "Random seed")->envname("FLORET_SEED");
  mc->add_option("--sampler", sampler, "path or multinomial")
      ->check(CLI::IsMember({"path", "multinomial"}));
  mc->add_option("--threads", threads, "Worker threads (0 = all cores)");
  mc->add_option("--format", format, "Output format")->check(CLI::IsMember(text_or_json));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const floret::Model model = floret::load_model(model_path);
    const bool json = format == "json";

    if (*validate) {
      if (json) {
        std::cout << floret::structure_to_json(model).dump(2) << '\n';
      } else {
        std::cout << floret::structure_to_text(model);
      }
    } else if (*matrix) {
      if (json) {
        std::cout << floret::design_matrix_to_json(model).dump(2) << '\n';
      } else {
        std::cout << floret::design_matrix_to_text(model);
      }
    } else if (*fit) {
      const auto y = floret::load_counts(data_path, model.tree);
      const auto report = floret::make_fit_report(model, y);
      if (json) {
        std::cout << floret::fit_report_to_json(model, report).dump(2) << '\n';
      } else {
        std::cout << floret::fit_report_to_text(model, report);
      }
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      if (strict && report.fit.boundary) return kExitNumerical;
    } else if (*simulate) {
      const auto theta = parse_theta(theta_args, model.tree);
      const auto y = parse_sampler(sampler) == floret::Sampler::path
                         ? floret::sample_path(model.tree, theta, n, seed)
                         : floret::sample_multinomial(model.matrix, theta, n, seed);
      std::cout << floret::format_counts(
          y, model.tree, counts_format == "csv" ? floret::CountsFormat::csv : floret::CountsFormat::json);
    } else if (*mc) {
      floret::SimulationConfig cfg;
      cfg.theta0 = parse_theta(theta_args, model.tree);
      cfg.n = mc_n;
      cfg.reps = reps;
      cfg.seed = seed;
      cfg.sampler = parse_sampler(sampler);
      cfg.threads = threads;
      const auto report = floret::run_monte_carlo(cfg, model);
      const auto check = floret::check_against_theory(report, cfg, model);
      if (json) {
        std::cout << floret::monte_carlo_to_json(model, cfg, report, check).dump(2) << '\n';
      } else {
        std::cout << floret::monte_carlo_to_text(model, cfg, report, check);
      }
    }
  } catch (const floret::BoundaryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const floret::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
