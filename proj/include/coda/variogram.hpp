#pragma once

// Parametric variogram models, empirical estimation on grids, weighted
// fitting, block regularization and deconvolution from areal data.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "coda/grid.hpp"

namespace coda {

enum class VariogramFamily { spherical, exponential, gaussian };

std::string to_string(VariogramFamily f);
VariogramFamily variogram_family_from_string(const std::string& s);

struct VariogramModel {
  VariogramFamily family = VariogramFamily::spherical;
  double nugget = 0.0;
  double psill = 1.0;  // partial sill
  double range = 1.0;  // meters (practical range for exponential/gaussian)

  double sill() const { return nugget + psill; }
  /// Semivariance; gamma(0) = 0, sup gamma = nugget + psill.
  double gamma(double h) const;
  /// Covariance; cov(0) = nugget + psill, cov(h) = sill - gamma(h) for h > 0.
  double cov(double h) const;

  std::string to_text() const;
  static VariogramModel from_text(const std::string& text);
};

struct EmpiricalVariogram {
  std::vector<double> lag;         // bin centers, meters
  std::vector<double> semivariance;
  std::vector<std::int64_t> pairs; // pair count per bin
};

/// Omnidirectional method-of-moments estimator over grid pixel pairs.
/// lag_width and max_dist of 0 select the defaults (cellsize and half the
/// grid diagonal respectively). Nodata pixels are skipped.
EmpiricalVariogram empirical_variogram(const ScalarField& field,
                                       double lag_width = 0.0,
                                       double max_dist = 0.0);

/// Weighted least squares fit (weights pair_count / h^2), deterministic
/// coarse grid search followed by pattern-search refinement.
VariogramModel fit_variogram(const EmpiricalVariogram& emp,
                             VariogramFamily family);

/// Block-to-block semivariance of a point-support model at coarse lag h,
/// by discrete averaging over the P x P fine-center pairs:
/// gamma_block(h) = mean_gamma(blocks at lag h) - mean_gamma(within block).
double regularized_gamma(const VariogramModel& point_model,
                         const CoarseFineMap& map, double h);

struct DeconvolutionReport {
  int iterations = 0;
  double rel_diff = 0.0;  // weighted relative difference at the best candidate
  bool converged = true;
};

/// Goovaerts-style iterative deconvolution: recover a point-support model
/// whose regularization matches the given coarse-support model.
VariogramModel deconvolve(const VariogramModel& coarse_model,
                          const CoarseFineMap& map, VariogramFamily family,
                          DeconvolutionReport* report = nullptr);

/// Memoized block-block and point-block covariances of a point model over a
/// nested grid pair, discretized over the P fine-pixel centers per block.
/// Build is lazy; reads after a warm-up phase do not mutate shared state if
/// the same keys were already touched.
class BlockCovarianceCache {
 public:
  BlockCovarianceCache(const VariogramModel& model, const CoarseFineMap& map);

  const VariogramModel& model() const { return model_; }
  const CoarseFineMap& map() const { return map_; }

  double block_block(int br1, int bc1, int br2, int bc2);
  double point_block(int fine_row, int fine_col, int br, int bc);
  double point_point(int fr1, int fc1, int fr2, int fc2) const;
  double point_var() const { return model_.sill(); }

 private:
  VariogramModel model_;
  CoarseFineMap map_;
  std::unordered_map<std::uint64_t, double> bb_;
  std::unordered_map<std::uint64_t, double> pb_;
};

}  // namespace coda
