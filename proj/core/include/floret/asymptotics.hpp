#pragma once

// Asymptotic covariance of the closed-form MLE.
//
// With theta~ the non-redundant parameters (last component of each floret
// dropped) and A = diag(p)^{-1/2} dp/dtheta~, the matrix A'A is block
// diagonal with floret blocks
//
//   S_f(p) * (diag(1 / theta~_f) + 1 1' / theta_{f,J_f}),
//
// where S_f(p) is the expected number of floret-f applications per subject.
// Its inverse, the asymptotic covariance of sqrt(N)(theta~_hat - theta~), is
//
//   (1 / S_f(p)) * (diag(theta~_f) - theta~_f theta~_f').
//
// All functions require theta in the open simplex and throw BoundaryError
// otherwise.

#include <vector>

#include <Eigen/Dense>

#include "floret/estimation.hpp"
#include "floret/model.hpp"

namespace floret {

// I x (J - F) matrix of dp_i / dtheta_{fj}, j < J_f, with theta_{f,J_f}
// eliminated through the sum-to-one constraint.
Eigen::MatrixXd jacobian(const DesignMatrix& m, const ParameterVector& theta);

// S_f(p(theta)) for every floret.
Eigen::VectorXd expected_exposure_rates(const DesignMatrix& m, const ParameterVector& theta);

// Closed-form A'A, (J - F) x (J - F).
Eigen::MatrixXd ata_matrix(const DesignMatrix& m, const ParameterVector& theta);

// Closed-form asymptotic covariance of sqrt(N) theta~_hat. Never inverts a
// matrix numerically.
Eigen::MatrixXd covariance_theta(const DesignMatrix& m, const ParameterVector& theta);

// Delta-method covariance of sqrt(N) p_hat: J Phi_theta J'.
Eigen::MatrixXd covariance_p(const DesignMatrix& m, const ParameterVector& theta);

struct CovarianceResult {
  Eigen::MatrixXd phi_theta;
  Eigen::MatrixXd phi_p;
  Eigen::VectorXd exposure_rates;  // S_f(p(theta))
};

CovarianceResult covariance(const DesignMatrix& m, const ParameterVector& theta);

struct StandardErrors {
  // One vector per floret covering all J_f components; the last component's
  // variance is 1' Phi_f 1 because theta_{f,J_f} = 1 - sum theta~_f.
  std::vector<Eigen::VectorXd> theta;
  Eigen::VectorXd p;
};

// Plug-in Wald standard errors at theta_hat. Throws BoundaryError for a
// boundary fit.
StandardErrors standard_errors(const FitResult& fit, const DesignMatrix& m);

}  // namespace floret
