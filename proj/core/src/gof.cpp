#include "floret/gof.hpp"

#include <cmath>
#include <limits>

#include "floret/error.hpp"

namespace floret {

namespace {

void check_fitted(const ObservedCounts& y, const Eigen::VectorXd& y_hat) {
  if (static_cast<std::size_t>(y_hat.size()) != y.size()) {
    throw DomainError("observed and fitted counts differ in length");
  }
  for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
    if (!(y_hat(i) > 0.0)) {
      throw DomainError("fitted count is zero", "leaf " + std::to_string(i + 1));
    }
  }
}

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 10000;

// P(a, x) by its power series; converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the modified Lentz continued fraction; for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double pearson_x2(const ObservedCounts& y, const Eigen::VectorXd& y_hat) {
  check_fitted(y, y_hat);
  double x2 = 0.0;
  for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
    const double diff = static_cast<double>(y[static_cast<std::size_t>(i)]) - y_hat(i);
    x2 += diff * diff / y_hat(i);
  }
  return x2;
}

double deviance_g2(const ObservedCounts& y, const Eigen::VectorXd& y_hat) {
  check_fitted(y, y_hat);
  double g2 = 0.0;
  for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
    const auto yi = static_cast<double>(y[static_cast<std::size_t>(i)]);
    if (yi > 0.0) g2 += yi * std::log(yi / y_hat(i));
  }
  // Rounding can leave a perfect fit at -1e-16.
  return std::max(0.0, 2.0 * g2);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_q requires a > 0 and finite x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chisq_upper_tail(double x, int df) {
  if (df < 1) throw DomainError("chi-square degrees of freedom must be >= 1");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("chi-square statistic must be finite and >= 0");
  return gamma_q(0.5 * df, 0.5 * x);
}

GofSummary goodness_of_fit(const DesignMatrix& m, const FitResult& fit, const ObservedCounts& y) {
  GofSummary s;
  s.df = degrees_of_freedom(m);
  if (fit.boundary) {
    // Cells with a zero fitted probability necessarily have zero counts; they
    // carry no information and are left out of both sums.
    std::vector<std::int64_t> kept_y;
    std::vector<double> kept_hat;
    for (Eigen::Index i = 0; i < fit.y_hat.size(); ++i) {
      if (fit.y_hat(i) > 0.0) {
        kept_y.push_back(y[static_cast<std::size_t>(i)]);
        kept_hat.push_back(fit.y_hat(i));
      }
    }
    const ObservedCounts ky(std::move(kept_y));
    const Eigen::VectorXd khat = Eigen::Map<const Eigen::VectorXd>(
        kept_hat.data(), static_cast<Eigen::Index>(kept_hat.size()));
    s.x2 = pearson_x2(ky, khat);
    s.g2 = deviance_g2(ky, khat);
  } else {
    s.x2 = pearson_x2(y, fit.y_hat);
    s.g2 = deviance_g2(y, fit.y_hat);
  }
  s.small_expected = (fit.y_hat.array() < GofSummary::kSmallExpectedCount).any();
  if (!fit.boundary && s.df > 0) {
    s.p_x2 = chisq_upper_tail(s.x2, s.df);
    s.p_g2 = chisq_upper_tail(s.g2, s.df);
  }
  return s;
}

}  // namespace floret
