#include "floret/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

#include "floret/asymptotics.hpp"
#include "floret/error.hpp"
#include "floret/gof.hpp"

namespace floret {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ stream);
}

double uniform01(Engine& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

namespace {

std::size_t draw_outcome(const Eigen::VectorXd& probs, Engine& engine) {
  const double u = uniform01(engine);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    if (probs(j) <= 0.0) continue;
    cumulative += probs(j);
    last_positive = static_cast<std::size_t>(j);
    if (u < cumulative) return last_positive;
  }
  return last_positive;
}

}  // namespace

ObservedCounts sample_path(const SequentialTree& tree, const ParameterVector& theta,
                           std::int64_t n, Engine& engine) {
  if (n < 0) throw DomainError("sample size must be >= 0");
  if (theta.floret_count() != tree.floret_count()) throw DomainError("parameter/floret mismatch");
  for (std::size_t f = 0; f < tree.floret_count(); ++f) {
    if (static_cast<std::size_t>(theta.block(f).size()) != tree.florets()[f].arity()) {
      throw DomainError("parameter block size does not match floret arity");
    }
  }
  // Leaf index reached by taking outcome j at node k.
  std::vector<std::vector<std::size_t>> leaf_at(tree.node_count());
  for (std::size_t k = 0; k < tree.node_count(); ++k) {
    leaf_at[k].assign(tree.nodes()[k].children.size(), 0);
  }
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) {
    const PathStep& end = tree.leaves()[i].path.back();
    leaf_at[end.node][end.outcome] = i;
  }

  std::vector<std::int64_t> counts(tree.leaf_count(), 0);
  for (std::int64_t s = 0; s < n; ++s) {
    std::size_t node = 0;
    for (;;) {
      const NodeSpec& spec = tree.nodes()[node];
      const std::size_t j = draw_outcome(theta.block(spec.floret), engine);
      if (const auto& child = spec.children[j]) {
        node = *child;
      } else {
        ++counts[leaf_at[node][j]];
        break;
      }
    }
  }
  return ObservedCounts(std::move(counts));
}

ObservedCounts sample_path(const SequentialTree& tree, const ParameterVector& theta,
                           std::int64_t n, std::uint64_t seed) {
  Engine engine(stream_seed(seed, 0));
  return sample_path(tree, theta, n, engine);
}

ObservedCounts sample_multinomial(const DesignMatrix& m, const ParameterVector& theta,
                                  std::int64_t n, Engine& engine) {
  if (n < 0) throw DomainError("sample size must be >= 0");
  check_dimensions(m, theta);
  if (!theta.interior()) throw DomainError("multinomial sampler requires interior parameters");
  const Eigen::VectorXd p = leaf_probabilities(m, theta);
  std::vector<std::int64_t> counts(m.cols(), 0);
  std::int64_t remaining = n;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < m.cols() && remaining > 0; ++i) {
    const double q = std::clamp(p(static_cast<Eigen::Index>(i)) / mass, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> binom(remaining, q);
    counts[i] = binom(engine);
    remaining -= counts[i];
    mass -= p(static_cast<Eigen::Index>(i));
  }
  counts.back() += remaining;
  return ObservedCounts(std::move(counts));
}

ObservedCounts sample_multinomial(const DesignMatrix& m, const ParameterVector& theta,
                                  std::int64_t n, std::uint64_t seed) {
  Engine engine(stream_seed(seed, 0));
  return sample_multinomial(m, theta, n, engine);
}

namespace {

struct Replicate {
  bool used = false;
  Eigen::VectorXd scaled_error;
  Eigen::VectorXd abs_error;
  Eigen::VectorXd gamma;
  Eigen::VectorXd rate;
  double x2 = 0.0;
  double g2 = 0.0;
};

Replicate run_replicate(const SimulationConfig& cfg, const Model& model,
                        const Eigen::VectorXd& reduced0, std::size_t k) {
  Engine engine(stream_seed(cfg.seed, k));
  const ObservedCounts y = cfg.sampler == Sampler::path
                               ? sample_path(model.tree, cfg.theta0, cfg.n, engine)
                               : sample_multinomial(model.matrix, cfg.theta0, cfg.n, engine);
  Replicate r;
  FitResult fit;
  try {
    fit = fit_mle(model.matrix, y);
  } catch (const DataError&) {
    return r;  // a floret never reached: counted as boundary
  }
  if (fit.boundary) return r;
  r.used = true;
  const Eigen::VectorXd diff = fit.theta_hat.reduced() - reduced0;
  r.scaled_error = std::sqrt(static_cast<double>(cfg.n)) * diff;
  r.abs_error = diff.cwiseAbs();
  const auto F = static_cast<Eigen::Index>(model.matrix.floret_count());
  r.gamma.resize(F);
  r.rate.resize(F);
  for (Eigen::Index f = 0; f < F; ++f) {
    r.gamma(f) = fit.exposure.florets[static_cast<std::size_t>(f)].ratio;
    r.rate(f) = fit.exposure.florets[static_cast<std::size_t>(f)].rate;
  }
  r.x2 = pearson_x2(y, fit.y_hat);
  r.g2 = deviance_g2(y, fit.y_hat);
  return r;
}

}  // namespace

MonteCarloReport run_monte_carlo(const SimulationConfig& cfg, const Model& model) {
  if (cfg.n < 1) throw DomainError("sample size n must be >= 1");
  if (cfg.reps < 1) throw DomainError("replicate count must be >= 1");
  check_dimensions(model.matrix, cfg.theta0);
  if (!cfg.theta0.interior()) throw DomainError("Monte Carlo study requires interior theta0");

  const Eigen::VectorXd reduced0 = cfg.theta0.reduced();
  std::vector<Replicate> results(cfg.reps);

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.reps));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(threads);
  auto worker = [&](unsigned t) {
    try {
      for (std::size_t k = next++; k < cfg.reps; k = next++) {
        results[k] = run_replicate(cfg, model, reduced0, k);
      }
    } catch (...) {
      failures[t] = std::current_exception();
      next = cfg.reps;
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  const auto d = static_cast<Eigen::Index>(model.matrix.reduced_size());
  const auto F = static_cast<Eigen::Index>(model.matrix.floret_count());
  MonteCarloReport report;
  report.reps = cfg.reps;
  report.df = degrees_of_freedom(model.matrix);
  report.mean_scaled_error = Eigen::VectorXd::Zero(d);
  report.mean_abs_error = Eigen::VectorXd::Zero(d);
  report.covariance = Eigen::MatrixXd::Zero(d, d);
  report.mean_exposure_ratio = Eigen::VectorXd::Zero(F);
  report.mean_exposure_rate = Eigen::VectorXd::Zero(F);

  for (const auto& r : results) {
    if (!r.used) {
      ++report.boundary;
      continue;
    }
    ++report.used;
    report.mean_scaled_error += r.scaled_error;
    report.mean_abs_error += r.abs_error;
    report.mean_exposure_ratio += r.gamma;
    report.mean_exposure_rate += r.rate;
    report.mean_x2 += r.x2;
    report.mean_g2 += r.g2;
  }
  if (report.used == 0) return report;
  const double used = static_cast<double>(report.used);
  report.mean_scaled_error /= used;
  report.mean_abs_error /= used;
  report.mean_exposure_ratio /= used;
  report.mean_exposure_rate /= used;
  report.mean_x2 /= used;
  report.mean_g2 /= used;

  // Two-pass central moments, in replicate order.
  double ss_x2 = 0.0;
  double ss_g2 = 0.0;
  for (const auto& r : results) {
    if (!r.used) continue;
    const Eigen::VectorXd c = r.scaled_error - report.mean_scaled_error;
    report.covariance += c * c.transpose();
    ss_x2 += (r.x2 - report.mean_x2) * (r.x2 - report.mean_x2);
    ss_g2 += (r.g2 - report.mean_g2) * (r.g2 - report.mean_g2);
  }
  if (report.used > 1) {
    report.covariance /= used - 1.0;
    report.sd_x2 = std::sqrt(ss_x2 / (used - 1.0));
    report.sd_g2 = std::sqrt(ss_g2 / (used - 1.0));
  }
  return report;
}

MonteCarloCheck check_against_theory(const MonteCarloReport& report, const SimulationConfig& cfg,
                                     const Model& model) {
  MonteCarloCheck check;
  check.phi_theta = covariance_theta(model.matrix, cfg.theta0);
  check.expected_rates = expected_exposure_rates(model.matrix, cfg.theta0);
  check.covariance_error = (report.covariance - check.phi_theta).norm() / check.phi_theta.norm();
  check.rate_error = ((report.mean_exposure_rate - check.expected_rates).array() /
                      check.expected_rates.array())
                         .abs()
                         .matrix();
  check.covariance_ok = report.used > 1 && check.covariance_error < MonteCarloCheck::kCovarianceTolerance;
  check.rates_ok = report.used > 0 && (check.rate_error.array() < MonteCarloCheck::kRateTolerance).all();
  return check;
}

}  // namespace floret
