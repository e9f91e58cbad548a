#pragma once

// Stochastic engines: unconditional Gaussian random field simulation, the
// synthetic compositional generator, and block sequential Gaussian
// simulation conditioned on coarse data.

#include <optional>

#include "coda/downscale.hpp"
#include "coda/rng.hpp"

namespace coda {

/// Zero-mean stationary Gaussian field with covariance from the model.
/// Grids up to `dense_cap` nodes use a dense Cholesky factorization; larger
/// grids are simulated sequentially, each node kriged from the nearest
/// previously simulated nodes.
ScalarField simulate_grf(const VariogramModel& model, const GridSpec& spec,
                         RngStream& rng, int dense_cap = 20000,
                         int sequential_neighbors = 16);

struct SyntheticOptions {
  std::optional<Composition> center;  // default: closed U[0,1] draws
  std::optional<double> sill;         // default: U[0.025, 2.5]
  double range = 2000.0;              // meters, spherical, no nugget
  int dense_cap = 20000;
};

struct SyntheticTruth {
  Composition center;
  double sill = 0.0;
  VariogramModel model;  // per-ILR-coordinate marginal model

  SyntheticTruth() : center(neutral(3)) {}
};

/// Three-part compositional field with spatially constant center and
/// uncorrelated ILR coordinates simulated from a common spherical model.
CompositionField generate_synthetic_psfs(const GridSpec& spec,
                                         std::uint64_t seed,
                                         const SyntheticOptions& options = {},
                                         SyntheticTruth* truth = nullptr);

struct BsgsConfig {
  KrigingConfig kriging;       // coarse-block conditioning
  int previous_neighbors = 16; // previously simulated fine values per node
  /// Testing hook: draw with zero variance, i.e. emit the kriged mean.
  bool zero_variance = false;
};

struct SimulationEnsemble {
  std::vector<CompositionField> realizations;
  TrendModel trend;
  std::vector<VariogramModel> models;  // per ILR coordinate
  std::uint64_t seed = 0;
};

/// Block sequential Gaussian simulation: per realization and ILR coordinate,
/// visit fine pixels along a seeded random path, krige each node from the
/// nearest coarse blocks plus previously simulated nodes in a joint bordered
/// system, and draw from the resulting Gaussian. Realization r uses RNG
/// streams derived from (seed, r) only.
SimulationEnsemble bsgs(const CompositionField& coarse,
                        const SimplexBasis& basis,
                        const std::vector<ScalarField>& fine_covariates,
                        const std::vector<VariogramModel>& coordinate_models,
                        const CoarseFineMap& map, int n_realizations,
                        std::uint64_t seed, const BsgsConfig& config = {});

}  // namespace coda
