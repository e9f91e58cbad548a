#pragma once

// Area-to-point kriging: bordered linear solve per fine pixel from coarse
// block residuals, with block-support covariances.

#include <optional>
#include <vector>

#include "coda/variogram.hpp"

namespace coda {

struct KrigingConfig {
  /// Number of nearest coarse blocks used per target pixel (M-bar).
  /// Values larger than the block count mean a global neighborhood.
  int neighborhood = 25;
  /// Relative pivot threshold for singularity detection.
  double pivot_tol = 1e-12;
};

struct AtpkSolution {
  double prediction = 0.0;
  double variance = 0.0;  // C(0) - lambda'sigma - mu
  double mu = 0.0;        // Lagrange multiplier
  std::vector<std::pair<int, int>> neighbors;  // coarse (row, col), in order
  std::vector<double> weights;                 // lambda, same order
};

/// Solve the ordinary area-to-point system for one fine pixel.
AtpkSolution solve_atpk(int fine_row, int fine_col,
                        const ScalarField& coarse_residuals,
                        BlockCovarianceCache& cache, const KrigingConfig& config);

/// Per-pixel neighbor lists and weights of a full-field run, for callers that
/// need to re-evaluate the predictor elsewhere.
struct WeightsRecord {
  std::vector<std::vector<std::pair<int, int>>> neighbors;  // per fine pixel
  std::vector<std::vector<double>> weights;
};

struct ResidualPrediction {
  ScalarField prediction;
  ScalarField variance;
};

/// Componentwise ATPK over every non-nodata fine pixel.
ResidualPrediction predict_residual_field(const ScalarField& coarse_residuals,
                                          const VariogramModel& model,
                                          const CoarseFineMap& map,
                                          const KrigingConfig& config,
                                          WeightsRecord* record = nullptr);

}  // namespace coda
