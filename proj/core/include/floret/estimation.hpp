#pragma once

// Closed-form maximum likelihood for floret models.
//
// For every floret the MLE is the floret's sufficient statistic normalized by
// its exposure size,
//
//   theta_f = M_f y / S_f(y),   S_f(y) = 1' M_f y,
//
// and the fitted leaf probabilities follow from the monomial map. When a
// floret has no overall effect the fitted sufficient statistics are only
// proportional to the observed ones; the common factor is the exposure ratio
// gamma_f = S_f(y_hat) / S_f(y).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "floret/model.hpp"
#include "floret/rational.hpp"

namespace floret {

// Leaf counts in the tree's leaf order. Entries are non-negative; a zero
// total is representable (a sampler asked for n = 0) but every estimation
// entry point rejects it.
class ObservedCounts {
 public:
  ObservedCounts() = default;
  // Throws DataError on a negative entry.
  explicit ObservedCounts(std::vector<std::int64_t> counts);

  std::span<const std::int64_t> values() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  std::int64_t total() const { return total_; }
  Eigen::VectorXd as_vector() const;

  bool operator==(const ObservedCounts&) const = default;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Throws DataError unless y has one entry per leaf and N >= 1.
void check_counts(const DesignMatrix& m, const ObservedCounts& y);

struct SufficientStatistics {
  std::vector<std::vector<std::int64_t>> per_floret;  // M_f y
  std::vector<std::int64_t> exposure;                 // S_f(y) = 1' M_f y
};

SufficientStatistics sufficient_statistics(const DesignMatrix& m, const ObservedCounts& y);

struct FloretExposure {
  std::int64_t observed = 0;  // S_f(y), treatment applications
  double expected = 0.0;      // S_f(y_hat)
  double ratio = 0.0;         // gamma_f
  double rate = 0.0;          // S_f(N p_hat) / N, applications per subject
};

struct ExposureStats {
  std::vector<FloretExposure> florets;
};

struct FitResult {
  ParameterVector theta_hat;
  Eigen::VectorXd p_hat;
  Eigen::VectorXd y_hat;
  ExposureStats exposure;
  SufficientStatistics statistics;
  std::int64_t n = 0;
  // Some component of theta_hat is zero: the estimate sits on the boundary of
  // the simplex and asymptotic results do not apply.
  bool boundary = false;
  // Kernel log-likelihood at theta_hat, with 0 log 0 = 0.
  double log_likelihood = 0.0;
};

// sum_f (M_f y)' log theta_f. Throws DomainError if any theta component is
// not strictly positive.
double log_likelihood(const DesignMatrix& m, const ParameterVector& theta, const ObservedCounts& y);

// Throws DataError if y does not match the model or S_f(y) = 0 for a floret.
FitResult fit_mle(const DesignMatrix& m, const ObservedCounts& y);

ExposureStats exposure_statistics(const DesignMatrix& m, const FitResult& fit,
                                  const ObservedCounts& y);

// The same estimates in exact rational arithmetic.
struct ExactFit {
  std::vector<std::vector<Rational>> theta_hat;
  std::vector<Rational> p_hat;
  std::vector<Rational> y_hat;
  std::vector<Rational> expected_exposure;  // S_f(y_hat)
  std::vector<Rational> exposure_ratio;     // gamma_f
  std::vector<Rational> exposure_rate;      // S_f(y_hat) / N
};

ExactFit fit_exact(const DesignMatrix& m, const ObservedCounts& y);

struct FloretProportionality {
  // (M_f y_hat)_j / (M_f y)_j, or nullopt where (M_f y)_j = 0.
  std::vector<std::optional<double>> ratios;
  double gamma = 0.0;
  double max_relative_deviation = 0.0;
  bool undefined = false;
  bool passes = false;
};

struct ProportionalityReport {
  static constexpr double kTolerance = 1e-9;

  std::vector<FloretProportionality> florets;
  bool passes() const;
};

// Checks that within each floret every fitted-to-observed sufficient
// statistic ratio equals the exposure ratio. Zero observed components are
// reported as undefined and make that floret fail, without throwing.
ProportionalityReport check_proportionality(const DesignMatrix& m, const FitResult& fit,
                                            const ObservedCounts& y);

}  // namespace floret
