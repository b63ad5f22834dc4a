#pragma once

// Fit and Monte Carlo reports, as JSON (machine) and aligned text (human).
// Decimals in text output use 6 significant digits; JSON carries full double
// precision plus exact rationals for every closed-form quantity. Edge
// probability estimates are given as the unreduced fraction M_f y / S_f(y)
// with integer numerator and denominator. Derived rationals (leaf
// probabilities, exposure) can outgrow 64 bits, so their numerator and
// denominator are decimal strings.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "floret/asymptotics.hpp"
#include "floret/estimation.hpp"
#include "floret/gof.hpp"
#include "floret/model.hpp"
#include "floret/simulate.hpp"

namespace floret {

struct FitReport {
  ObservedCounts y;
  FitResult fit;
  ExactFit exact;
  GofSummary gof;
  ProportionalityReport proportionality;
  // Absent for a boundary fit.
  std::optional<CovarianceResult> covariance;
  std::optional<StandardErrors> se;
  std::vector<std::string> warnings;
};

FitReport make_fit_report(const Model& model, const ObservedCounts& y);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json structure_to_json(const Model& model);
std::string structure_to_text(const Model& model);

nlohmann::json fit_report_to_json(const Model& model, const FitReport& report);
std::string fit_report_to_text(const Model& model, const FitReport& report);

// Design matrix with floret/outcome row labels and leaf path headers.
std::string design_matrix_to_text(const Model& model);
nlohmann::json design_matrix_to_json(const Model& model);

nlohmann::json monte_carlo_to_json(const Model& model, const SimulationConfig& cfg,
                                   const MonteCarloReport& report, const MonteCarloCheck& check);
std::string monte_carlo_to_text(const Model& model, const SimulationConfig& cfg,
                                const MonteCarloReport& report, const MonteCarloCheck& check);

// Six significant digits.
std::string format_decimal(double x);

}  // namespace floret
