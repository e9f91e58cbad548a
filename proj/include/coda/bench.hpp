#pragma once

// Benchmark harness: synthetic validation of the four upscale/downscale
// method combinations, perturbation sensitivity analysis and the
// upscale-downscale experiment on user-supplied rasters.

#include <ostream>

#include "coda/bsgs.hpp"
#include "coda/downscale.hpp"

namespace coda {

/// One report row: error summary of a method under one setting. Errors are
/// per-pixel Euclidean distances between reference and reconstructed parts.
struct BenchRow {
  std::string setting;  // "key=value;key=value" description of the setting
  MethodTag method = MethodTag::AA;
  std::int64_t pixels = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double q05 = 0.0;
  double median = 0.0;
  double q95 = 0.0;
  double max_error = 0.0;
  std::int64_t negative_pixels = 0;  // pixels with a nonpositive part
  double max_sum_dev = 0.0;          // max |sum of parts - 1|
};

std::vector<std::string> bench_csv_header();
std::vector<std::string> bench_csv_row(const BenchRow& row);

/// Summarize raw part predictions against a reference composition field.
BenchRow summarize_prediction(const std::vector<ScalarField>& parts,
                              const CompositionField& reference,
                              MethodTag method, std::string setting);

/// Upscale `fine_truth` in the geometry selected by `method`, downscale it
/// back with the selected method, and score against the truth.
BenchRow run_method(MethodTag method, const CompositionField& fine_truth,
                    const SimplexBasis& basis, const CoarseFineMap& map,
                    const DownscaleConfig& config,
                    std::vector<ScalarField>* parts_out = nullptr);

struct SyntheticBenchOptions {
  int ncols = 150;
  int nrows = 137;
  double cellsize = 20.0;
  int realizations = 20;
  int f_min = 2;
  int f_max = 15;  // upscaling factor drawn uniformly per realization
  double range = 2000.0;
  DownscaleConfig downscale;

  /// Protocol-scale profile: 500x458 grid, 100 realizations, factors up to 30.
  void apply_full_profile();
};

/// Validation on synthetic fields: per realization, draw a random center and
/// sill, simulate the truth, and score all four methods.
std::vector<BenchRow> bench_synthetic(const SyntheticBenchOptions& options,
                                      std::uint64_t seed,
                                      std::ostream* log = nullptr);

struct SensitivityBenchOptions {
  int ncols = 150;
  int nrows = 137;
  double cellsize = 20.0;
  int f = 15;  // P = f^2 = 225
  double sill = 0.1;
  double range = 2000.0;
  std::vector<double> s2_fractions = {0.1, 0.2, 0.3, 0.4, 0.5,
                                      0.6, 0.7, 0.8, 0.9, 1.0};
  DownscaleConfig downscale;
};

struct SensitivityOutput {
  std::vector<BenchRow> rows;  // methods x s2 fractions
  /// Per method, per-pixel maximum of |sum of parts - 1| across fractions.
  std::vector<ScalarField> max_violation;
  std::vector<std::string> method_names;
};

/// Sensitivity to iid Gaussian perturbations of the coarse data's ILR
/// coordinates, with variance s2 = fraction x sill, on one synthetic field
/// with center (1/3, 1/3, 1/3).
SensitivityOutput bench_sensitivity(const SensitivityBenchOptions& options,
                                    std::uint64_t seed,
                                    std::ostream* log = nullptr);

/// Upscale-downscale experiment on a user-supplied composition raster:
/// scores all four methods for every factor in [f_min, f_max], cropping the
/// raster to a multiple of the factor.
std::vector<BenchRow> bench_updown(const CompositionField& reference,
                                   int f_min, int f_max,
                                   const DownscaleConfig& config,
                                   std::ostream* log = nullptr);

}  // namespace coda
