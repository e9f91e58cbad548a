#include "coda/kriging.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace coda {

namespace {

// Nearest non-nodata blocks, with the block containing the target pixel
// always included when it carries data.
std::vector<std::pair<int, int>> neighborhood_of(
    int fr, int fc, const ScalarField& coarse_residuals,
    const CoarseFineMap& map, int requested) {
  const int M = map.block_count();
  requested = std::min(requested, M);
  const auto home = map.block_of(fr, fc);
  const bool home_valid = !coarse_residuals.is_nodata(home.first, home.second);

  int ask = requested;
  std::vector<std::pair<int, int>> picked;
  while (true) {
    auto cand = map.nearest_blocks(fr, fc, ask);
    picked.clear();
    for (const auto& b : cand) {
      if (!coarse_residuals.is_nodata(b.first, b.second)) picked.push_back(b);
      if (static_cast<int>(picked.size()) == requested) break;
    }
    if (static_cast<int>(picked.size()) == requested || ask == M) break;
    ask = std::min(M, ask * 2);
  }
  if (picked.empty()) {
    throw std::runtime_error("kriging: no informed blocks near pixel (" +
                             std::to_string(fr) + "," + std::to_string(fc) + ")");
  }
  if (home_valid &&
      std::find(picked.begin(), picked.end(), home) == picked.end()) {
    picked.back() = home;
  }
  return picked;
}

}  // namespace

AtpkSolution solve_atpk(int fine_row, int fine_col,
                        const ScalarField& coarse_residuals,
                        BlockCovarianceCache& cache,
                        const KrigingConfig& config) {
  const CoarseFineMap& map = cache.map();
  if (!coarse_residuals.spec().same_shape(map.coarse_spec())) {
    throw std::invalid_argument("solve_atpk: residuals not on the coarse spec");
  }
  if (config.neighborhood < 1) {
    throw std::invalid_argument("solve_atpk: neighborhood must be >= 1");
  }
  auto nb = neighborhood_of(fine_row, fine_col, coarse_residuals, map,
                            config.neighborhood);
  const long m = static_cast<long>(nb.size());

  Eigen::MatrixXd A(m + 1, m + 1);
  Eigen::VectorXd rhs(m + 1);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j <= i; ++j) {
      const double v = cache.block_block(nb[i].first, nb[i].second,
                                         nb[j].first, nb[j].second);
      A(i, j) = v;
      A(j, i) = v;
    }
    A(i, m) = 1.0;
    A(m, i) = 1.0;
    rhs[i] = cache.point_block(fine_row, fine_col, nb[i].first, nb[i].second);
  }
  A(m, m) = 0.0;
  rhs[m] = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  lu.setThreshold(config.pivot_tol);
  if (!lu.isInvertible()) {
    std::string blocks;
    for (const auto& b : nb) {
      blocks += " (" + std::to_string(b.first) + "," + std::to_string(b.second) + ")";
    }
    throw std::runtime_error(
        "solve_atpk: singular kriging system, degenerate blocks:" + blocks);
  }
  Eigen::VectorXd sol = lu.solve(rhs);

  AtpkSolution out;
  out.neighbors = std::move(nb);
  out.weights.assign(sol.data(), sol.data() + m);
  out.mu = sol[m];
  for (long i = 0; i < m; ++i) {
    out.prediction +=
        sol[i] * coarse_residuals.at(out.neighbors[i].first, out.neighbors[i].second);
  }
  out.variance = cache.point_var() - rhs.head(m).dot(sol.head(m)) - out.mu;
  return out;
}

ResidualPrediction predict_residual_field(const ScalarField& coarse_residuals,
                                          const VariogramModel& model,
                                          const CoarseFineMap& map,
                                          const KrigingConfig& config,
                                          WeightsRecord* record) {
  BlockCovarianceCache cache(model, map);
  const GridSpec& fs = map.fine_spec();
  ResidualPrediction out{ScalarField(fs, fs.nodata), ScalarField(fs, fs.nodata)};
  if (record) {
    record->neighbors.assign(fs.size(), {});
    record->weights.assign(fs.size(), {});
  }
  for (int r = 0; r < fs.nrows; ++r) {
    for (int c = 0; c < fs.ncols; ++c) {
      const auto home = map.block_of(r, c);
      if (coarse_residuals.is_nodata(home.first, home.second)) continue;
      AtpkSolution sol = solve_atpk(r, c, coarse_residuals, cache, config);
      out.prediction.at(r, c) = sol.prediction;
      out.variance.at(r, c) = sol.variance;
      if (record) {
        const std::size_t idx =
            static_cast<std::size_t>(r) * fs.ncols + static_cast<std::size_t>(c);
        record->neighbors[idx] = std::move(sol.neighbors);
        record->weights[idx] = std::move(sol.weights);
      }
    }
  }
  return out;
}

}  // namespace coda
