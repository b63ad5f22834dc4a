#include "floret/asymptotics.hpp"

#include <cmath>

#include "floret/error.hpp"

namespace floret {

namespace {

void require_interior(const DesignMatrix& m, const ParameterVector& theta) {
  check_dimensions(m, theta);
  if (!theta.interior()) {
    throw BoundaryError("asymptotic quantities need every edge probability in (0, 1)");
  }
}

}  // namespace

Eigen::MatrixXd jacobian(const DesignMatrix& m, const ParameterVector& theta) {
  require_interior(m, theta);
  const Eigen::VectorXd p = leaf_probabilities(m, theta);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(m.cols()), static_cast<Eigen::Index>(m.reduced_size()));
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const RowBlock& b = m.block(f);
    const std::size_t last_row = b.offset + b.size - 1;
    const double last = theta(f, b.size - 1);
    for (std::size_t j = 0; j + 1 < b.size; ++j) {
      const auto col = static_cast<Eigen::Index>(m.reduced_offset(f) + j);
      const double tj = theta(f, j);
      for (std::size_t i = 0; i < m.cols(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        jac(row, col) = p(row) * (m(b.offset + j, i) / tj - m(last_row, i) / last);
      }
    }
  }
  return jac;
}

Eigen::VectorXd expected_exposure_rates(const DesignMatrix& m, const ParameterVector& theta) {
  const Eigen::VectorXd p = leaf_probabilities(m, theta);
  Eigen::VectorXd rates(static_cast<Eigen::Index>(m.floret_count()));
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    rates(static_cast<Eigen::Index>(f)) = m.block_column_sums(f).cast<double>().dot(p);
  }
  return rates;
}

Eigen::MatrixXd ata_matrix(const DesignMatrix& m, const ParameterVector& theta) {
  require_interior(m, theta);
  const Eigen::VectorXd rates = expected_exposure_rates(m, theta);
  const auto n = static_cast<Eigen::Index>(m.reduced_size());
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const Eigen::VectorXd& t = theta.block(f);
    const Eigen::Index k = t.size() - 1;
    const auto at = static_cast<Eigen::Index>(m.reduced_offset(f));
    Eigen::MatrixXd block = Eigen::MatrixXd::Constant(k, k, 1.0 / t(k));
    block.diagonal() += t.head(k).cwiseInverse();
    ata.block(at, at, k, k) = rates(static_cast<Eigen::Index>(f)) * block;
  }
  return ata;
}

Eigen::MatrixXd covariance_theta(const DesignMatrix& m, const ParameterVector& theta) {
  require_interior(m, theta);
  const Eigen::VectorXd rates = expected_exposure_rates(m, theta);
  const auto n = static_cast<Eigen::Index>(m.reduced_size());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const Eigen::VectorXd& t = theta.block(f);
    const Eigen::Index k = t.size() - 1;
    const auto at = static_cast<Eigen::Index>(m.reduced_offset(f));
    const Eigen::VectorXd head = t.head(k);
    Eigen::MatrixXd block = -head * head.transpose();
    block.diagonal() += head;
    phi.block(at, at, k, k) = block / rates(static_cast<Eigen::Index>(f));
  }
  return phi;
}

Eigen::MatrixXd covariance_p(const DesignMatrix& m, const ParameterVector& theta) {
  const Eigen::MatrixXd jac = jacobian(m, theta);
  Eigen::MatrixXd phi_p = jac * covariance_theta(m, theta) * jac.transpose();
  // Symmetrize away rounding asymmetry from the triple product.
  return 0.5 * (phi_p + phi_p.transpose());
}

CovarianceResult covariance(const DesignMatrix& m, const ParameterVector& theta) {
  CovarianceResult out;
  out.phi_theta = covariance_theta(m, theta);
  out.phi_p = covariance_p(m, theta);
  out.exposure_rates = expected_exposure_rates(m, theta);
  return out;
}

StandardErrors standard_errors(const FitResult& fit, const DesignMatrix& m) {
  if (fit.boundary || !fit.theta_hat.interior()) {
    throw BoundaryError("standard errors are undefined for a boundary MLE");
  }
  const double n = static_cast<double>(fit.n);
  const Eigen::MatrixXd phi = covariance_theta(m, fit.theta_hat);
  StandardErrors se;
  for (std::size_t f = 0; f < m.floret_count(); ++f) {
    const auto k = static_cast<Eigen::Index>(m.block(f).size - 1);
    const auto at = static_cast<Eigen::Index>(m.reduced_offset(f));
    const Eigen::MatrixXd block = phi.block(at, at, k, k);
    Eigen::VectorXd s(k + 1);
    s.head(k) = (block.diagonal() / n).cwiseSqrt();
    s(k) = std::sqrt(block.sum() / n);
    se.theta.push_back(std::move(s));
  }
  se.p = (covariance_p(m, fit.theta_hat).diagonal().cwiseMax(0.0) / n).cwiseSqrt();
  return se;
}

}  // namespace floret
