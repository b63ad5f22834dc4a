#pragma once

#include <optional>

#include <Eigen/Dense>

#include "floret/estimation.hpp"
#include "floret/model.hpp"

namespace floret {

// sum_i (y_i - y_hat_i)^2 / y_hat_i. Throws DomainError if any y_hat_i <= 0
// or the lengths differ.
double pearson_x2(const ObservedCounts& y, const Eigen::VectorXd& y_hat);

// 2 sum_i y_i log(y_i / y_hat_i), with 0 log 0 = 0. Same errors as pearson_x2.
double deviance_g2(const ObservedCounts& y, const Eigen::VectorXd& y_hat);

// P(chi2_df > x) = Q(df/2, x/2), regularized upper incomplete gamma.
// Throws DomainError for df < 1 or x < 0 or non-finite x.
double chisq_upper_tail(double x, int df);

// Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0. Power series
// for x < a + 1, Lentz continued fraction otherwise.
double gamma_q(double a, double x);

struct GofSummary {
  static constexpr double kSmallExpectedCount = 5.0;

  double x2 = 0.0;
  double g2 = 0.0;
  int df = 0;
  // Asymptotic plug-in p-values; absent for a boundary fit or df = 0.
  std::optional<double> p_x2;
  std::optional<double> p_g2;
  // Some fitted count is below kSmallExpectedCount, so the chi-square
  // approximation is doubtful. Warning only.
  bool small_expected = false;
};

GofSummary goodness_of_fit(const DesignMatrix& m, const FitResult& fit, const ObservedCounts& y);

}  // namespace floret
