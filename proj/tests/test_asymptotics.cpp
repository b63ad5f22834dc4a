#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "jacobian_oracle.hpp"
#include "floret/asymptotics.hpp"
#include "floret/error.hpp"

using namespace floret;
using namespace floret::testing;

TEST_CASE("scalar A'A and covariance for the one-floret examples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const auto hwe = fixture("hwe").matrix;
  const auto calves = fixture("calves").matrix;
  const auto vaccine = fixture("vaccine").matrix;
  for (int k = 0; k < 100; ++k) {
    const double t = u(rng);
    const auto theta = params({{t, 1.0 - t}});
    const double v = t * (1.0 - t);
    CHECK(ata_matrix(hwe, theta)(0, 0) == doctest::Approx(2.0 / v).epsilon(1e-12));
    CHECK(ata_matrix(calves, theta)(0, 0) == doctest::Approx((t + 1.0) / v).epsilon(1e-12));
    CHECK(std::abs(covariance_theta(hwe, theta)(0, 0) - v / 2.0) < 1e-12);
    CHECK(std::abs(covariance_theta(calves, theta)(0, 0) - v / (t + 1.0)) < 1e-12);
    CHECK(std::abs(covariance_theta(vaccine, theta)(0, 0) - v / (t * t + t + 1.0)) < 1e-12);
  }
}

TEST_CASE("regimen covariance is diagonal with its closed-form entries") {
  const auto m = fixture("regimen").matrix;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < 50; ++k) {
    const double z = u(rng), e = u(rng);
    const auto phi = covariance_theta(m, params({{z, 1 - z}, {e, 1 - e}}));
    CHECK(std::abs(phi(0, 0) - z * (1 - z) / (z + 1)) < 1e-12);
    CHECK(std::abs(phi(1, 1) - e * (1 - e) / (z * z - z + 1)) < 1e-12);
    CHECK(phi(0, 1) == 0.0);
    CHECK(phi(1, 0) == 0.0);
  }
}

TEST_CASE("severity covariance blocks") {
  const auto model = fixture("severity");
  const double e1 = 305.0 / 519, e2 = 144.0 / 519, z = 277.0 / 728;
  const auto theta = params({{e1, e2, 1 - e1 - e2}, {z, 1 - z}});
  const auto phi = covariance_theta(model.matrix, theta);
  REQUIRE(phi.rows() == 3);
  CHECK(phi(0, 0) == doctest::Approx(e1 * (1 - e1)).epsilon(1e-13));
  CHECK(phi(1, 1) == doctest::Approx(e2 * (1 - e2)).epsilon(1e-13));
  CHECK(phi(0, 1) == doctest::Approx(-e1 * e2).epsilon(1e-13));
  CHECK(phi(2, 2) == doctest::Approx(z * (1 - z) / (z + 1)).epsilon(1e-13));
  CHECK(phi(0, 2) == 0.0);
  CHECK(phi(1, 2) == 0.0);
  CHECK(rel_err(ata_matrix(model.matrix, theta), triple_product(model.matrix, theta)) < 1e-9);
}

TEST_CASE("HWE Jacobian column") {
  const auto m = fixture("hwe").matrix;
  const double t = 0.3;
  const Eigen::MatrixXd jac = jacobian(m, params({{t, 1 - t}}));
  // p = (t^2, t(1-t), t(1-t), (1-t)^2)
  CHECK(jac(0, 0) == doctest::Approx(2 * t));
  CHECK(jac(1, 0) == doctest::Approx(1 - 2 * t));
  CHECK(jac(2, 0) == doctest::Approx(1 - 2 * t));
  CHECK(jac(3, 0) == doctest::Approx(-2 * (1 - t)));
}

TEST_CASE("property: closed forms agree with the Jacobian oracle on random trees") {
  std::mt19937_64 rng(13);
  double worst_fd = 0.0, worst_ata = 0.0, worst_inv = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto tree = random_tree(rng);
    const auto m = build_design_matrix(tree);
    const auto theta = random_theta(m, rng, 0.05);
    const Eigen::MatrixXd jac = jacobian(m, theta);

    // Column sums vanish since the leaf probabilities always sum to one.
    CHECK(jac.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    worst_fd = std::max(worst_fd, rel_err(fd_jacobian(tree, m, theta), jac));

    const Eigen::MatrixXd ata = ata_matrix(m, theta);
    worst_ata = std::max(worst_ata, rel_err(ata, triple_product(m, theta)));

    const Eigen::MatrixXd phi = covariance_theta(m, theta);
    const auto n = phi.rows();
    worst_inv = std::max(worst_inv, (phi * ata - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    CHECK(rel_err(phi, ata.inverse()) < 1e-9);

    // Cross-floret entries are structurally zero.
    for (std::size_t f = 0; f < m.floret_count(); ++f) {
      for (std::size_t g = 0; g < m.floret_count(); ++g) {
        if (f == g) continue;
        const auto rf = static_cast<Eigen::Index>(m.reduced_offset(f));
        const auto rg = static_cast<Eigen::Index>(m.reduced_offset(g));
        const auto nf = static_cast<Eigen::Index>(m.block(f).size - 1);
        const auto ng = static_cast<Eigen::Index>(m.block(g).size - 1);
        CHECK(phi.block(rf, rg, nf, ng).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ata.block(rf, rg, nf, ng).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ata.inverse().block(rf, rg, nf, ng).cwiseAbs().maxCoeff() < 1e-9);
      }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(phi);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    const Eigen::MatrixXd phi_p = covariance_p(m, theta);
    CHECK((phi_p - phi_p.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(phi_p.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_p(phi_p);
    CHECK(eig_p.eigenvalues().minCoeff() > -1e-12);
  }
  CHECK(worst_fd < 1e-5);
  CHECK(worst_ata < 1e-8);
  CHECK(worst_inv < 1e-9);
}

TEST_CASE("property: one-floret binary models reduce to the scalar formula") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int checked = 0;
  for (int k = 0; k < 400 && checked < 100; ++k) {
    const auto tree = random_tree(rng, {4, 1, 2, 0.4});
    const auto m = build_design_matrix(tree);
    const double t = u(rng);
    const auto theta = params({{t, 1 - t}});
    const double s = expected_exposure_rates(m, theta)(0);
    CHECK(std::abs(covariance_theta(m, theta)(0, 0) - t * (1 - t) / s) < 1e-12);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("HWE phi_p has rank one") {
  const auto phi_p = covariance_p(fixture("hwe").matrix, params({{0.5, 0.5}}));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(phi_p);
  int positive = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) positive += eig.eigenvalues()(i) > 1e-12;
  CHECK(positive == 1);
  CHECK(std::abs(phi_p.sum()) < 1e-9);
}

TEST_CASE("standard errors") {
  const auto model = fixture("vaccine");
  const auto fit = fit_mle(model.matrix, ObservedCounts({80, 12, 44, 64}));
  const auto se = standard_errors(fit, model.matrix);
  const double t = 308.0 / 428.0;
  const double expected = std::sqrt(t * (1 - t) / ((t * t + t + 1) * 200.0));
  CHECK(se.theta[0](0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(se.theta[0](0) == doctest::Approx(0.0212337577339021512).epsilon(1e-12));
  CHECK(se.theta[0](1) == doctest::Approx(se.theta[0](0)).epsilon(1e-14));
  REQUIRE(se.p.size() == 4);

  SUBCASE("last component of a three-outcome floret") {
    const auto severity = fixture("severity");
    const auto jfit = fit_mle(severity.matrix, ObservedCounts({46, 83, 176, 16, 37, 91, 6, 21, 43}));
    const auto jse = standard_errors(jfit, severity.matrix);
    const auto phi = covariance_theta(severity.matrix, jfit.theta_hat);
    const double var_last = phi.topLeftCorner(2, 2).sum() / 519.0;
    CHECK(jse.theta[0](2) == doctest::Approx(std::sqrt(var_last)).epsilon(1e-12));
  }
  SUBCASE("boundary fits are refused") {
    const auto hwe = fixture("hwe");
    const auto bfit = fit_mle(hwe.matrix, ObservedCounts({5, 0, 0, 0}));
    CHECK_THROWS_AS(standard_errors(bfit, hwe.matrix), BoundaryError);
    CHECK_THROWS_AS(covariance_theta(hwe.matrix, params({{1.0, 0.0}})), BoundaryError);
  }
}
