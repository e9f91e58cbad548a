#pragma once

// End-to-end downscaling pipelines: scalar ATPRK, componentwise Euclidean
// ATPRCoK on raw parts, and compositional ILR-ATPRCoK, plus the native
// simplex-side evaluation of the predictor and constraint diagnostics.

#include <optional>

#include "coda/composition.hpp"
#include "coda/kriging.hpp"
#include "coda/trend.hpp"
#include "coda/variogram.hpp"

namespace coda {

/// Upscale geometry x downscale method, as run by the benchmark harness.
enum class MethodTag { EE, EA, AE, AA };

std::string to_string(MethodTag t);
MethodTag method_tag_from_string(const std::string& s);

struct DownscaleConfig {
  KrigingConfig kriging;
  VariogramFamily family = VariogramFamily::spherical;
  /// When non-empty, fixed point-support models per component; variogram
  /// estimation and deconvolution are skipped.
  std::vector<VariogramModel> fixed_models;
  bool run_deconvolution = true;
  double lag_width = 0.0;  // 0 = coarse cellsize
  double max_lag = 0.0;    // 0 = half the coarse grid diagonal
  bool keep_weights = false;
};

struct Diagnostics {
  std::optional<ScalarField> error_map;  // per-pixel Euclidean distance to ref
  double mean_error = 0.0;
  double max_error = 0.0;
  std::int64_t negative_part_pixels = 0;
  std::int64_t compared_pixels = 0;
  std::optional<ScalarField> sum_dev_map;  // |sum of parts - 1|
  double max_sum_dev = 0.0;
  /// Largest per-block relative deviation of the re-upscaled prediction from
  /// the coarse input (geometry chosen by the caller).
  double max_block_dev = 0.0;
};

struct DownscaleResult {
  std::vector<ScalarField> components;        // fine predictions per component
  std::vector<ScalarField> variances;         // kriging variance per component
  std::optional<CompositionField> composition;  // set by ilr_atprcok
  std::vector<std::string> component_names;
  TrendModel trend;
  std::vector<ScalarField> fine_trend;        // trend term at fine scale
  std::vector<ScalarField> coarse_residuals;  // per component
  std::vector<VariogramModel> point_models;   // per component
  std::vector<DeconvolutionReport> deconvolution;
  std::vector<WeightsRecord> weights;         // per component (keep_weights)
  Diagnostics diagnostics;
};

/// Regression + area-to-point kriging for one scalar coarse field.
DownscaleResult atprk_scalar(const ScalarField& coarse,
                             const std::vector<ScalarField>& fine_covariates,
                             const CoarseFineMap& map,
                             const DownscaleConfig& config);

/// Componentwise ATPRK on the raw parts (no simplex structure). The output
/// may violate positivity and unit-sum; diagnostics are populated.
DownscaleResult atprcok_euclidean(const CompositionField& coarse,
                                  const std::vector<ScalarField>& fine_covariates,
                                  const CoarseFineMap& map,
                                  const DownscaleConfig& config);

/// ILR-transform, per-coordinate ATPRK, back-transform. The output is a
/// valid composition field by construction.
DownscaleResult ilr_atprcok(const CompositionField& coarse,
                            const SimplexBasis& basis,
                            const std::vector<ScalarField>& fine_covariates,
                            const CoarseFineMap& map,
                            const DownscaleConfig& config);

/// Evaluate the predictor natively in the simplex for a single pixel:
/// lifts each (p-1)x(p-1) weight matrix through the contrast matrix,
/// applies it to the residual compositions and perturbs with the trend.
Composition simplex_predict_pixel(const SimplexBasis& basis,
                                  const Eigen::VectorXd& trend_ilr,
                                  const std::vector<Eigen::MatrixXd>& weightsY,
                                  const std::vector<Composition>& residuals);

/// Re-evaluate a full ilr_atprcok run on the simplex side (weight-mapping
/// route). Requires keep_weights in the originating config.
CompositionField simplex_predictor(const DownscaleResult& result,
                                   const SimplexBasis& basis,
                                   const CoarseFineMap& map);

/// Constraint and error diagnostics over raw part predictions.
/// `coarse` enables the per-block re-upscaling check; `aitchison_blocks`
/// selects the geometry of that check.
Diagnostics compute_diagnostics(const std::vector<ScalarField>& parts_pred,
                                const CompositionField* reference,
                                const CoarseFineMap* map,
                                const CompositionField* coarse,
                                bool aitchison_blocks);

}  // namespace coda
