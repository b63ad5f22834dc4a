// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and time limits are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "floret/asymptotics.hpp"
#include "floret/estimation.hpp"
#include "floret/gof.hpp"
#include "floret/simulate.hpp"
#include "homogeneity.hpp"
#include "jacobian_oracle.hpp"
#include "oracle_mle.hpp"

using namespace floret;
using namespace floret::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::function<void(Outcome&)> body;
};

// 500 random (tree of depth <= 3, interior theta) instances shared by
// criteria 4 and 5. Every edge probability is at least 1e-3.
struct Instance {
  SequentialTree tree;
  DesignMatrix m;
  ParameterVector theta;
};

const std::vector<Instance>& instances() {
  static const std::vector<Instance> all = [] {
    std::vector<Instance> out;
    std::mt19937_64 rng(20240501);
    while (out.size() < 500) {
      auto tree = random_tree(rng, {3, 3, 4, 0.35});
      auto m = build_design_matrix(tree);
      ParameterVector theta = random_theta(m, rng, 0.0);
      while (theta.flat().minCoeff() < 1e-3) theta = random_theta(m, rng, 0.0);
      out.push_back({std::move(tree), std::move(m), std::move(theta)});
    }
    return out;
  }();
  return all;
}

void severity(Outcome& o) {
  const auto model = fixture("severity");
  const ObservedCounts y({46, 83, 176, 16, 37, 91, 6, 21, 43});
  const auto exact = fit_exact(model.matrix, y);
  const auto fit = fit_mle(model.matrix, y);
  const auto gof = goodness_of_fit(model.matrix, fit, y);
  o.require(exact.theta_hat[0][0] == Rational(305, 519), "eta_1 = 305/519");
  o.require(exact.theta_hat[0][1] == Rational(144, 519), "eta_2 = 144/519");
  o.require(exact.theta_hat[1][0] == Rational(277, 728), "zeta_1 = 277/728");
  const double reference[] = {44.16, 71.89, 188.95, 20.85, 33.94, 89.21, 10.13, 16.50, 43.37};
  double worst = 0.0;
  for (int i = 0; i < 9; ++i) worst = std::max(worst, std::abs(fit.y_hat(i) - reference[i]));
  o.require(worst <= 0.01, "y_hat within 0.01");
  o.require(std::abs(gof.x2 - 7.04) <= 0.01, "X2 = 7.04");
  o.require(std::abs(gof.g2 - 7.26) <= 0.01, "G2 = 7.26");
  o.require(gof.df == 5, "df = 5");
  o.detail << "X2=" << gof.x2 << " G2=" << gof.g2 << " df=" << gof.df << " max|dy|=" << worst;
}

void vaccine(Outcome& o) {
  const auto model = fixture("vaccine");
  const ObservedCounts y({80, 12, 44, 64});
  const auto fit = fit_mle(model.matrix, y);
  const auto gof = goodness_of_fit(model.matrix, fit, y);
  o.require(fit_exact(model.matrix, y).theta_hat[0][0] == Rational(308, 428), "theta_1 = 308/428");
  const double reference[] = {0.373, 0.145, 0.202, 0.280};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(fit.p_hat(i) - reference[i]));
  o.require(worst <= 0.001, "p_hat within 0.001");
  o.require(std::abs(gof.x2 - 11.85) <= 0.01, "X2 = 11.85");
  o.require(std::abs(gof.g2 - 14.65) <= 0.01, "G2 = 14.65");
  o.require(gof.df == 2, "df = 2");
  o.detail << "X2=" << gof.x2 << " G2=" << gof.g2 << " df=" << gof.df << " max|dp|=" << worst;
}

void exposure_ratio(Outcome& o) {
  std::mt19937_64 rng(33);
  const auto hwe = fixture("hwe");
  double worst_hwe = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ObservedCounts y(random_counts(4, rng, 1, 500));
    worst_hwe = std::max(worst_hwe, std::abs(fit_mle(hwe.matrix, y).exposure.florets[0].ratio - 1.0));
  }
  o.require(worst_hwe <= 1e-12, "HWE gamma = 1");
  o.require(floret_has_overall_effect(hwe.matrix, 0), "HWE has OE");

  // Floret 0 of calves and floret 1 of the regimen lack the overall effect.
  double min_gap = 1.0, worst_prop = 0.0;
  for (const auto& [name, f] : std::vector<std::pair<std::string, std::size_t>>{{"calves", 0}, {"regimen", 1}}) {
    const auto model = fixture(name);
    o.require(!floret_has_overall_effect(model.matrix, f), name + " floret lacks OE");
    for (int k = 0; k < 100; ++k) {
      const ObservedCounts y(random_counts(model.tree.leaf_count(), rng, 1, 500));
      const auto fit = fit_mle(model.matrix, y);
      o.require(fit_exact(model.matrix, y).exposure_ratio[f] != Rational(1), name + " gamma != 1");
      min_gap = std::min(min_gap, std::abs(fit.exposure.florets[f].ratio - 1.0));
      const auto prop = check_proportionality(model.matrix, fit, y);
      worst_prop = std::max(worst_prop, prop.florets[f].max_relative_deviation);
    }
  }
  o.require(worst_prop < 1e-9, "proportionality within 1e-9");
  o.detail << "max|gamma_HWE-1|=" << worst_hwe << " min|gamma-1| (non-OE)=" << min_gap
           << " max prop. deviation=" << worst_prop;
}

void ata_certification(Outcome& o) {
  double worst_ata = 0.0, worst_fd = 0.0;
  for (const auto& in : instances()) {
    worst_ata = std::max(worst_ata, rel_err(ata_matrix(in.m, in.theta), triple_product(in.m, in.theta)));
    worst_fd = std::max(worst_fd, rel_err(fd_jacobian(in.tree, in.m, in.theta), jacobian(in.m, in.theta)));
  }
  o.require(worst_ata < 1e-8, "A'A within 1e-8");
  o.require(worst_fd < 1e-5, "Jacobian within 1e-5 of finite differences");
  o.detail << instances().size() << " instances, max rel A'A=" << worst_ata << " max rel FD=" << worst_fd;
}

void covariance_certification(Outcome& o) {
  double worst_inv = 0.0;
  for (const auto& in : instances()) {
    const Eigen::MatrixXd phi = covariance_theta(in.m, in.theta);
    const Eigen::MatrixXd ata = ata_matrix(in.m, in.theta);
    const auto n = phi.rows();
    worst_inv = std::max(worst_inv, (phi * ata - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
  }
  o.require(worst_inv < 1e-9, "phi * A'A = I within 1e-9");

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  const auto hwe = fixture("hwe").matrix;
  const auto calves = fixture("calves").matrix;
  const auto vaccine = fixture("vaccine").matrix;
  double worst_scalar = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = u(rng);
    const auto theta = params({{t, 1.0 - t}});
    const double v = t * (1.0 - t);
    worst_scalar = std::max({worst_scalar, std::abs(covariance_theta(hwe, theta)(0, 0) - v / 2.0),
                             std::abs(covariance_theta(calves, theta)(0, 0) - v / (t + 1.0)),
                             std::abs(covariance_theta(vaccine, theta)(0, 0) - v / (t * t + t + 1.0))});
  }
  o.require(worst_scalar < 1e-12, "scalar reductions within 1e-12");
  o.detail << "max|phi*A'A - I|=" << worst_inv << " max scalar error=" << worst_scalar;
}

void monte_carlo(Outcome& o) {
  struct Case {
    std::string name;
    ParameterVector theta;
    std::vector<double> rates;
  };
  const std::vector<Case> cases{
      {"calves", params({{0.6, 0.4}}), {1.6}},
      {"regimen", params({{0.5, 0.5}, {0.5, 0.5}}), {1.5, 0.75}},
  };
  std::uint64_t seed = 6000;
  for (const auto& c : cases) {
    const auto model = fixture(c.name);
    SimulationConfig cfg;
    cfg.theta0 = c.theta;
    cfg.n = 10000;
    cfg.reps = 2000;
    cfg.seed = seed++;
    const auto report = run_monte_carlo(cfg, model);
    const auto check = check_against_theory(report, cfg, model);
    o.require(check.covariance_error < 0.10, c.name + " covariance within 10%");
    double worst_rate = 0.0;
    for (std::size_t f = 0; f < c.rates.size(); ++f) {
      worst_rate = std::max(worst_rate, std::abs(report.mean_exposure_rate(static_cast<Eigen::Index>(f)) / c.rates[f] - 1.0));
    }
    o.require(worst_rate < 0.02, c.name + " exposure rates within 2%");
    o.detail << c.name << ": cov err=" << check.covariance_error << " rate err=" << worst_rate
             << " (" << report.used << "/" << report.reps << " used) ";
  }
}

void oracle_equivalence(Outcome& o) {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int fits = 0;
  for (const auto& name : fixture_names()) {
    const auto model = fixture(name);
    for (int k = 0; k < 3; ++k) {
      const ObservedCounts y(random_counts(model.tree.leaf_count(), rng, 1, 300));
      const auto closed = fit_mle(model.matrix, y).theta_hat.flat();
      const auto numeric = numerical_mle(model.tree, y).theta.flat();
      worst = std::max(worst, (closed - numeric).cwiseAbs().maxCoeff());
      ++fits;
    }
  }
  o.require(worst < 1e-6, "closed form within 1e-6 of numerical maximizer");
  o.detail << fits << " fits, max|theta_closed - theta_numeric|=" << worst;
}

void sampler_equivalence(Outcome& o) {
  std::uint64_t seed = 8000;
  double min_p = 1.0;
  for (const auto& name : fixture_names()) {
    const auto model = fixture(name);
    std::mt19937_64 rng(seed);
    const auto theta = random_theta(model.matrix, rng, 0.1);
    const auto a = sample_path(model.tree, theta, 10000, seed + 1);
    const auto b = sample_multinomial(model.matrix, theta, 10000, seed + 2);
    seed += 10;
    const auto h = two_sample_chi_square(a, b);
    o.require(h.p_value > 0.001, name + " not rejected at 0.001");
    min_p = std::min(min_p, h.p_value);
    o.detail << name << " p=" << h.p_value << " ";
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "severity data reproduction", 1.0, severity},
      {2, "vaccine reproduction", 1.0, vaccine},
      {3, "overall effect <=> unit exposure ratio", 0.0, exposure_ratio},
      {4, "A'A closed form vs Jacobian product", 30.0, ata_certification},
      {5, "covariance closed form", 0.0, covariance_certification},
      {6, "Monte Carlo asymptotics", 120.0, monte_carlo},
      {7, "closed form vs numerical maximizer", 0.0, oracle_equivalence},
      {8, "path vs multinomial sampler", 0.0, sampler_equivalence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.require(false, "runtime limit " + std::to_string(c.time_limit_s) + " s");
    }
    failed += !o.pass;
    std::printf("%s  %d  %-42s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
