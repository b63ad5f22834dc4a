#include "floret/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "floret/error.hpp"

namespace floret {

ObservedCounts::ObservedCounts(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] < 0) throw DataError("negative count", "leaf " + std::to_string(i + 1));
    total_ += counts_[i];
  }
}

Eigen::VectorXd ObservedCounts::as_vector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(counts_.size()));
  for (std::size_t i = 0; i < counts_.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(counts_[i]);
  return v;
}

void check_counts(const DesignMatrix& m, const ObservedCounts& y) {
  if (y.size() != m.cols()) {
    throw DataError("data has " + std::to_string(y.size()) + " counts but the model has " +
                    std::to_string(m.cols()) + " leaves");
  }
  if (y.total() < 1) throw DataError("total count N must be at least 1");
}

SufficientStatistics sufficient_statistics(const DesignMatrix& m, const ObservedCounts& y) {
  if (y.size() != m.cols()) throw DataError("count vector length does not match leaf count");
  SufficientStatistics s;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const RowBlock& b = m.block(f);
    std::vector<std::int64_t> stat(b.size, 0);
    for (std::size_t j = 0; j < b.size; ++j) {
      for (std::size_t i = 0; i < m.cols(); ++i) {
        stat[j] += static_cast<std::int64_t>(m(b.offset + j, i)) * y[i];
      }
    }
    s.exposure.push_back(std::accumulate(stat.begin(), stat.end(), std::int64_t{0}));
    s.per_floret.push_back(std::move(stat));
  }
  return s;
}

namespace {

double kernel(const DesignMatrix& m, const ParameterVector& theta, const SufficientStatistics& s) {
  double ll = 0.0;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    for (std::size_t j = 0; j < m.block(f).size; ++j) {
      const auto count = s.per_floret[f][j];
      if (count == 0) continue;
      ll += static_cast<double>(count) * std::log(theta(f, j));
    }
  }
  return ll;
}

// sum_i w_i q_i where w_i is the number of floret-f nodes on leaf i's path.
template <typename Vec>
auto exposure_of(const DesignMatrix& m, std::size_t f, const Vec& q) {
  const Eigen::VectorXi w = m.block_column_sums(f);
  std::decay_t<decltype(q[0])> total{0};
  for (std::size_t i = 0; i < m.cols(); ++i) total += w(static_cast<Eigen::Index>(i)) * q[i];
  return total;
}

}  // namespace

double log_likelihood(const DesignMatrix& m, const ParameterVector& theta, const ObservedCounts& y) {
  check_dimensions(m, theta);
  if (!theta.interior()) throw DomainError("log-likelihood requires strictly positive parameters");
  if (y.size() != m.cols()) throw DataError("count vector length does not match leaf count");
  return kernel(m, theta, sufficient_statistics(m, y));
}

FitResult fit_mle(const DesignMatrix& m, const ObservedCounts& y) {
  check_counts(m, y);
  FitResult fit;
  fit.statistics = sufficient_statistics(m, y);
  fit.n = y.total();

  std::vector<Eigen::VectorXd> blocks;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const auto exposure = fit.statistics.exposure[f];
    if (exposure == 0) {
      throw DataError("floret was never exposed (S_f(y) = 0); its MLE is undefined",
                      "floret " + std::to_string(f));
    }
    const auto& stat = fit.statistics.per_floret[f];
    Eigen::VectorXd b(static_cast<Eigen::Index>(stat.size()));
    for (std::size_t j = 0; j < stat.size(); ++j) {
      b(static_cast<Eigen::Index>(j)) = static_cast<double>(stat[j]) / static_cast<double>(exposure);
      if (stat[j] == 0) fit.boundary = true;
    }
    blocks.push_back(std::move(b));
  }
  fit.theta_hat = ParameterVector(std::move(blocks));
  fit.p_hat = leaf_probabilities(m, fit.theta_hat);
  fit.y_hat = static_cast<double>(fit.n) * fit.p_hat;
  fit.log_likelihood = kernel(m, fit.theta_hat, fit.statistics);
  fit.exposure = exposure_statistics(m, fit, y);
  return fit;
}

ExposureStats exposure_statistics(const DesignMatrix& m, const FitResult& fit,
                                  const ObservedCounts& y) {
  const SufficientStatistics s = sufficient_statistics(m, y);
  ExposureStats out;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    FloretExposure e;
    e.observed = s.exposure[f];
    e.expected = exposure_of(m, f, fit.y_hat);
    e.ratio = e.observed > 0 ? e.expected / static_cast<double>(e.observed) : 0.0;
    e.rate = e.expected / static_cast<double>(y.total());
    out.florets.push_back(e);
  }
  return out;
}

ExactFit fit_exact(const DesignMatrix& m, const ObservedCounts& y) {
  check_counts(m, y);
  const SufficientStatistics s = sufficient_statistics(m, y);
  ExactFit out;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    if (s.exposure[f] == 0) {
      throw DataError("floret was never exposed (S_f(y) = 0); its MLE is undefined",
                      "floret " + std::to_string(f));
    }
    std::vector<Rational> block;
    for (const auto stat : s.per_floret[f]) block.emplace_back(stat, s.exposure[f]);
    out.theta_hat.push_back(std::move(block));
  }
  const Rational n(y.total());
  for (std::size_t i = 0; i < m.cols(); ++i) {
    Rational p(1);
    for (std::size_t f = 0; f < m.floret_count(); ++f) {
      for (std::size_t j = 0; j < m.block(f).size; ++j) {
        const int power = m(m.block(f).offset + j, i);
        for (int e = 0; e < power; ++e) p *= out.theta_hat[f][j];
      }
    }
    out.y_hat.push_back(n * p);
    out.p_hat.push_back(std::move(p));
  }
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const Rational expected = exposure_of(m, f, out.y_hat);
    out.exposure_ratio.push_back(expected / Rational(s.exposure[f]));
    out.exposure_rate.push_back(expected / n);
    out.expected_exposure.push_back(expected);
  }
  return out;
}

bool ProportionalityReport::passes() const {
  return std::all_of(florets.begin(), florets.end(),
                     [](const FloretProportionality& f) { return f.passes; });
}

ProportionalityReport check_proportionality(const DesignMatrix& m, const FitResult& fit,
                                            const ObservedCounts& y) {
  const SufficientStatistics s = sufficient_statistics(m, y);
  ProportionalityReport report;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    FloretProportionality fp;
    fp.gamma = exposure_of(m, f, fit.y_hat) / static_cast<double>(s.exposure[f]);
    const RowBlock& b = m.block(f);
    for (std::size_t j = 0; j < b.size; ++j) {
      if (s.per_floret[f][j] == 0) {
        fp.ratios.emplace_back(std::nullopt);
        fp.undefined = true;
        continue;
      }
      double fitted = 0.0;
      for (std::size_t i = 0; i < m.cols(); ++i) {
        fitted += m(b.offset + j, i) * fit.y_hat(static_cast<Eigen::Index>(i));
      }
      const double ratio = fitted / static_cast<double>(s.per_floret[f][j]);
      fp.ratios.emplace_back(ratio);
      fp.max_relative_deviation =
          std::max(fp.max_relative_deviation, std::abs(ratio - fp.gamma) / std::abs(fp.gamma));
    }
    fp.passes = !fp.undefined && fp.max_relative_deviation < ProportionalityReport::kTolerance;
    report.florets.push_back(std::move(fp));
  }
  return report;
}

}  // namespace floret
