#pragma once

// Regression trend over covariates: coarse-scale OLS fit, prediction at any
// scale, residual extraction.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "coda/grid.hpp"

namespace coda {

struct TrendComponent {
  Eigen::VectorXd beta;  // coefficients in original covariate units
  double r2 = 0.0;
  double pearson = 0.0;  // between fitted and observed
};

struct TrendModel {
  std::vector<std::string> covariate_names;  // "intercept" first when present
  bool intercept = true;
  std::vector<TrendComponent> components;    // one per response component

  std::string to_text() const;
  static TrendModel from_text(const std::string& text);
};

struct TrendFit {
  TrendModel model;
  std::vector<ScalarField> residuals;  // observed - fitted, per component
};

/// Arithmetic block means of each covariate (intercept handling is the
/// caller's concern; a constant column upscales to itself).
std::vector<ScalarField> upscale_covariates(
    const std::vector<ScalarField>& fine_covariates, const CoarseFineMap& map);

/// Per-component OLS via column-pivoted QR on internally standardized
/// covariates. Pixels where any response or covariate is nodata are skipped.
/// Throws on rank deficiency, naming the collinear covariates.
TrendFit fit_ols(const std::vector<ScalarField>& responses,
                 const std::vector<ScalarField>& covariates,
                 std::vector<std::string> covariate_names = {},
                 bool intercept = true);

/// Linear combination per component at the covariates' scale.
std::vector<ScalarField> predict_trend(
    const TrendModel& model, const std::vector<ScalarField>& covariates,
    const GridSpec& spec);

}  // namespace coda
