#pragma once

// Data generation from floret models and Monte Carlo checks of the
// asymptotic theory.
//
// Random streams: every replicate k of a study seeded with s draws from
// std::mt19937_64 seeded with splitmix64(s, k), so a replicate's data is a
// pure function of (s, k) regardless of which thread runs it or in which
// order. Aggregation runs over replicate index order.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "floret/estimation.hpp"
#include "floret/model.hpp"

namespace floret {

using Engine = std::mt19937_64;

// Seed for stream `stream` of a study seeded with `seed` (splitmix64 finalizer
// applied to seed and stream).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform01(Engine& engine);

// Each of n subjects walks the tree from the root, drawing the outcome at
// every node from its floret's distribution. Boundary theta is allowed.
ObservedCounts sample_path(const SequentialTree& tree, const ParameterVector& theta,
                           std::int64_t n, Engine& engine);
ObservedCounts sample_path(const SequentialTree& tree, const ParameterVector& theta,
                           std::int64_t n, std::uint64_t seed);

// Direct draw from Mult(n, p(theta)) by conditional binomials. Requires
// interior theta.
ObservedCounts sample_multinomial(const DesignMatrix& m, const ParameterVector& theta,
                                  std::int64_t n, Engine& engine);
ObservedCounts sample_multinomial(const DesignMatrix& m, const ParameterVector& theta,
                                  std::int64_t n, std::uint64_t seed);

enum class Sampler { path, multinomial };

struct SimulationConfig {
  ParameterVector theta0;
  std::int64_t n = 1000;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  Sampler sampler = Sampler::path;
  // Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct MonteCarloReport {
  std::size_t reps = 0;
  std::size_t used = 0;      // interior fits entering the aggregates
  std::size_t boundary = 0;  // boundary or unexposed fits, excluded
  // Mean and covariance of sqrt(N)(theta~_hat - theta~_0).
  Eigen::VectorXd mean_scaled_error;
  Eigen::MatrixXd covariance;
  // Mean of |theta~_hat - theta~_0| per component.
  Eigen::VectorXd mean_abs_error;
  Eigen::VectorXd mean_exposure_ratio;  // gamma_f
  Eigen::VectorXd mean_exposure_rate;   // S_f(y_hat) / N
  double mean_x2 = 0.0;
  double mean_g2 = 0.0;
  double sd_x2 = 0.0;
  double sd_g2 = 0.0;
  int df = 0;
};

// Throws DomainError for an invalid config (n < 1, reps < 1, boundary theta0,
// dimension mismatch).
MonteCarloReport run_monte_carlo(const SimulationConfig& cfg, const Model& model);

// Comparison of a Monte Carlo report against the asymptotic theory at theta0.
struct MonteCarloCheck {
  static constexpr double kCovarianceTolerance = 0.10;  // Frobenius relative
  static constexpr double kRateTolerance = 0.02;        // relative

  Eigen::MatrixXd phi_theta;
  Eigen::VectorXd expected_rates;
  double covariance_error = 0.0;
  Eigen::VectorXd rate_error;
  bool covariance_ok = false;
  bool rates_ok = false;

  bool passes() const { return covariance_ok && rates_ok; }
};

MonteCarloCheck check_against_theory(const MonteCarloReport& report, const SimulationConfig& cfg,
                                     const Model& model);

}  // namespace floret
