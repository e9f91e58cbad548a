#include "coda/bsgs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <lapacke.h>

namespace coda {

namespace {

constexpr double kJitterScale = 1e-10;

struct NearNode {
  double d2;
  int r, c;
};

// Nearest `count` flagged pixels by expanding square rings around the target.
std::vector<NearNode> nearest_flagged(const std::vector<char>& flag,
                                      const GridSpec& spec, int tr, int tc,
                                      int count) {
  std::vector<NearNode> found;
  if (count <= 0) return found;
  const double min_cell = std::min(spec.cellsize_x, spec.cellsize_y);
  const int kmax = std::max(std::max(tr, spec.nrows - 1 - tr),
                            std::max(tc, spec.ncols - 1 - tc));
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kmax; ++k) {
    if (static_cast<int>(found.size()) >= count) {
      const double ring_min = (k - 1) * min_cell;
      if (ring_min * ring_min > worst) break;
    }
    const int r0 = tr - k, r1 = tr + k, c0 = tc - k, c1 = tc + k;
    auto visit = [&](int r, int c) {
      if (r < 0 || r >= spec.nrows || c < 0 || c >= spec.ncols) return;
      if (!flag[static_cast<std::size_t>(r) * spec.ncols + c]) return;
      const double dx = (c - tc) * spec.cellsize_x;
      const double dy = (r - tr) * spec.cellsize_y;
      found.push_back({dx * dx + dy * dy, r, c});
    };
    if (k == 0) {
      visit(tr, tc);
    } else {
      for (int c = c0; c <= c1; ++c) {
        visit(r0, c);
        visit(r1, c);
      }
      for (int r = r0 + 1; r <= r1 - 1; ++r) {
        visit(r, c0);
        visit(r, c1);
      }
    }
    if (static_cast<int>(found.size()) >= count) {
      std::sort(found.begin(), found.end(), [](const NearNode& a, const NearNode& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        if (a.r != b.r) return a.r < b.r;
        return a.c < b.c;
      });
      worst = found[static_cast<std::size_t>(count) - 1].d2;
    }
  }
  std::sort(found.begin(), found.end(), [](const NearNode& a, const NearNode& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.r != b.r) return a.r < b.r;
    return a.c < b.c;
  });
  if (static_cast<int>(found.size()) > count) found.resize(count);
  return found;
}

std::vector<std::uint32_t> random_path(std::size_t n, RngStream& rng) {
  std::vector<std::uint32_t> path(n);
  for (std::size_t i = 0; i < n; ++i) path[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(path[i - 1], path[j]);
  }
  return path;
}

ScalarField simulate_grf_dense(const VariogramModel& model, const GridSpec& spec,
                               RngStream& rng) {
  const int n = static_cast<int>(spec.size());
  // covariance depends on the index offset only; precompute the table
  std::vector<double> table(spec.size());
  for (int dr = 0; dr < spec.nrows; ++dr) {
    for (int dc = 0; dc < spec.ncols; ++dc) {
      const double dx = dc * spec.cellsize_x, dy = dr * spec.cellsize_y;
      table[static_cast<std::size_t>(dr) * spec.ncols + dc] =
          model.cov(std::sqrt(dx * dx + dy * dy));
    }
  }
  std::vector<double> C(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const int ri = i / spec.ncols, ci = i % spec.ncols;
    for (int j = 0; j <= i; ++j) {
      const int rj = j / spec.ncols, cj = j % spec.ncols;
      const double v = table[static_cast<std::size_t>(std::abs(ri - rj)) *
                                 spec.ncols +
                             std::abs(ci - cj)];
      C[static_cast<std::size_t>(i) * n + j] = v;
    }
    C[static_cast<std::size_t>(i) * n + i] += kJitterScale * model.sill();
  }
  const int info = LAPACKE_dpotrf(LAPACK_ROW_MAJOR, 'L', n, C.data(), n);
  if (info != 0) {
    throw std::runtime_error(
        "simulate_grf: covariance not positive definite after jitter (dpotrf "
        "info " +
        std::to_string(info) + ")");
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  for (double& x : g) x = rng.gaussian();
  ScalarField out(spec);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = C.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j <= i; ++j) acc += row[j] * g[static_cast<std::size_t>(j)];
    out.values()[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

ScalarField simulate_grf_sequential(const VariogramModel& model,
                                    const GridSpec& spec, RngStream& rng,
                                    int n_prev) {
  const std::size_t n = spec.size();
  ScalarField out(spec);
  std::vector<char> simulated(n, 0);
  const auto path = random_path(n, rng);
  const double c0 = model.sill();
  for (std::size_t step = 0; step < n; ++step) {
    const int idx = static_cast<int>(path[step]);
    const int tr = idx / spec.ncols, tc = idx % spec.ncols;
    const auto nb = nearest_flagged(simulated, spec, tr, tc, n_prev);
    double mean = 0.0, var = c0;
    if (!nb.empty()) {
      const long m = static_cast<long>(nb.size());
      Eigen::MatrixXd C(m, m);
      Eigen::VectorXd rhs(m), data(m);
      for (long i = 0; i < m; ++i) {
        for (long j = 0; j <= i; ++j) {
          const double dx = (nb[i].c - nb[j].c) * spec.cellsize_x;
          const double dy = (nb[i].r - nb[j].r) * spec.cellsize_y;
          const double v = model.cov(std::sqrt(dx * dx + dy * dy));
          C(i, j) = v;
          C(j, i) = v;
        }
        C(i, i) += kJitterScale * c0;
        rhs[i] = model.cov(std::sqrt(nb[i].d2));
        data[i] = out.at(nb[i].r, nb[i].c);
      }
      Eigen::VectorXd lambda = C.ldlt().solve(rhs);
      mean = lambda.dot(data);
      var = std::max(0.0, c0 - lambda.dot(rhs));
    }
    out.at(tr, tc) = mean + std::sqrt(var) * rng.gaussian();
    simulated[static_cast<std::size_t>(idx)] = 1;
  }
  return out;
}

}  // namespace

ScalarField simulate_grf(const VariogramModel& model, const GridSpec& spec,
                         RngStream& rng, int dense_cap,
                         int sequential_neighbors) {
  spec.validate();
  if (model.sill() <= 0.0) return ScalarField(spec, 0.0);
  if (static_cast<int>(spec.size()) <= dense_cap) {
    return simulate_grf_dense(model, spec, rng);
  }
  return simulate_grf_sequential(model, spec, rng, sequential_neighbors);
}

CompositionField generate_synthetic_psfs(const GridSpec& spec,
                                         std::uint64_t seed,
                                         const SyntheticOptions& options,
                                         SyntheticTruth* truth) {
  RngStream param_rng(seed, 0);
  const Composition mu =
      options.center.value_or(closure(std::vector<double>{
          param_rng.uniform(), param_rng.uniform(), param_rng.uniform()}));
  if (mu.dim() != 3) {
    throw std::invalid_argument("generate_synthetic_psfs: center must have 3 parts");
  }
  const double sill = options.sill.value_or(param_rng.uniform(0.025, 2.5));

  VariogramModel model;
  model.family = VariogramFamily::spherical;
  model.nugget = 0.0;
  model.psill = sill;
  model.range = options.range;

  const SimplexBasis basis =
      SimplexBasis::standard(3, {"clay", "silt", "sand"});
  const Eigen::VectorXd mu_ilr = basis.ilr(mu);

  std::vector<ScalarField> coords;
  for (int i = 0; i < 2; ++i) {
    RngStream grf_rng(seed, static_cast<std::uint64_t>(i) + 1);
    coords.push_back(simulate_grf(model, spec, grf_rng, options.dense_cap));
  }

  CompositionField out(spec, 3, {"clay", "silt", "sand"});
  for (int r = 0; r < spec.nrows; ++r) {
    for (int c = 0; c < spec.ncols; ++c) {
      Eigen::VectorXd y(2);
      y[0] = mu_ilr[0] + coords[0].at(r, c);
      y[1] = mu_ilr[1] + coords[1].at(r, c);
      out.set(r, c, basis.ilr_inv(y));
    }
  }
  if (truth) {
    truth->center = mu;
    truth->sill = sill;
    truth->model = model;
  }
  return out;
}

namespace {

struct LocalSystem {
  double mean = 0.0;
  double variance = 0.0;
  bool ok = false;
};

LocalSystem solve_joint(int tr, int tc,
                        const std::vector<std::pair<int, int>>& blocks,
                        const std::vector<NearNode>& prev,
                        const ScalarField& block_resid,
                        const ScalarField& sim_resid,
                        BlockCovarianceCache& cache) {
  const long m = static_cast<long>(blocks.size());
  const long q = static_cast<long>(prev.size());
  const long n = m + q;
  if (n == 0) return {};
  Eigen::MatrixXd A(n + 1, n + 1);
  Eigen::VectorXd rhs(n + 1), data(n);
  for (long i = 0; i < m; ++i) {
    for (long j = 0; j <= i; ++j) {
      const double v = cache.block_block(blocks[i].first, blocks[i].second,
                                         blocks[j].first, blocks[j].second);
      A(i, j) = v;
      A(j, i) = v;
    }
    rhs[i] = cache.point_block(tr, tc, blocks[i].first, blocks[i].second);
    data[i] = block_resid.at(blocks[i].first, blocks[i].second);
  }
  for (long i = 0; i < q; ++i) {
    const long ii = m + i;
    for (long j = 0; j < m; ++j) {
      A(ii, j) = A(j, ii) = cache.point_block(prev[i].r, prev[i].c,
                                              blocks[j].first, blocks[j].second);
    }
    for (long j = 0; j <= i; ++j) {
      const double v = cache.point_point(prev[i].r, prev[i].c, prev[j].r, prev[j].c);
      A(ii, m + j) = v;
      A(m + j, ii) = v;
    }
    A(ii, ii) += kJitterScale * cache.point_var();
    rhs[ii] = cache.point_point(tr, tc, prev[i].r, prev[i].c);
    data[ii] = sim_resid.at(prev[i].r, prev[i].c);
  }
  for (long i = 0; i < n; ++i) {
    A(i, n) = 1.0;
    A(n, i) = 1.0;
  }
  A(n, n) = 0.0;
  rhs[n] = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite() || (A * sol - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) {
    return {};
  }
  LocalSystem out;
  out.mean = sol.head(n).dot(data);
  out.variance =
      std::max(0.0, cache.point_var() - sol.head(n).dot(rhs.head(n)) - sol[n]);
  out.ok = true;
  return out;
}

}  // namespace

SimulationEnsemble bsgs(const CompositionField& coarse,
                        const SimplexBasis& basis,
                        const std::vector<ScalarField>& fine_covariates,
                        const std::vector<VariogramModel>& coordinate_models,
                        const CoarseFineMap& map, int n_realizations,
                        std::uint64_t seed, const BsgsConfig& config) {
  const std::size_t q = basis.coords();
  if (coordinate_models.size() != q) {
    throw std::invalid_argument("bsgs: need one model per ILR coordinate");
  }
  if (n_realizations < 1) {
    throw std::invalid_argument("bsgs: need at least one realization");
  }
  const GridSpec& cs = map.coarse_spec();
  const GridSpec& fs = map.fine_spec();

  // coarse ILR coordinates, trend and residuals (shared by all realizations)
  std::vector<ScalarField> coords(q, ScalarField(cs, cs.nodata));
  for (int r = 0; r < cs.nrows; ++r) {
    for (int c = 0; c < cs.ncols; ++c) {
      if (coarse.is_nodata(r, c)) continue;
      const Eigen::VectorXd y = basis.ilr(coarse.at(r, c));
      for (std::size_t i = 0; i < q; ++i) {
        coords[i].at(r, c) = y[static_cast<long>(i)];
      }
    }
  }
  auto coarse_covs = upscale_covariates(fine_covariates, map);
  TrendFit fit = fit_ols(coords, coarse_covs, {}, true);
  const auto fine_trend = predict_trend(fit.model, fine_covariates, fs);

  std::vector<BlockCovarianceCache> caches;
  caches.reserve(q);
  for (std::size_t i = 0; i < q; ++i) {
    caches.emplace_back(coordinate_models[i], map);
  }

  SimulationEnsemble ens;
  ens.trend = fit.model;
  ens.models = coordinate_models;
  ens.seed = seed;

  const int m_bar = std::min(config.kriging.neighborhood, map.block_count());

  for (int real = 0; real < n_realizations; ++real) {
    std::vector<ScalarField> sim_coords;
    for (std::size_t ci = 0; ci < q; ++ci) {
      RngStream rng(seed, static_cast<std::uint64_t>(real) * 64 + ci + 1);
      const auto path = random_path(fs.size(), rng);
      ScalarField resid(fs, 0.0);
      std::vector<char> simulated(fs.size(), 0);
      for (const auto node : path) {
        const int tr = static_cast<int>(node) / fs.ncols;
        const int tc = static_cast<int>(node) % fs.ncols;
        const auto home = map.block_of(tr, tc);
        if (fit.residuals[ci].is_nodata(home.first, home.second)) continue;

        auto blocks = map.nearest_blocks(tr, tc, m_bar);
        std::erase_if(blocks, [&](const std::pair<int, int>& b) {
          return fit.residuals[ci].is_nodata(b.first, b.second);
        });
        auto prev =
            nearest_flagged(simulated, fs, tr, tc, config.previous_neighbors);

        LocalSystem sys;
        // shrink the conditioning set on numerical failure
        while (true) {
          sys = solve_joint(tr, tc, blocks, prev, fit.residuals[ci], resid,
                            caches[ci]);
          if (sys.ok) break;
          if (!prev.empty()) {
            prev.resize(prev.size() / 2);
          } else if (blocks.size() > 1) {
            blocks.resize(blocks.size() / 2);
          } else {
            throw std::runtime_error("bsgs: singular local system at pixel (" +
                                     std::to_string(tr) + "," +
                                     std::to_string(tc) + ")");
          }
        }
        const double draw = config.zero_variance ? 0.0 : rng.gaussian();
        resid.at(tr, tc) = sys.mean + std::sqrt(sys.variance) * draw;
        simulated[static_cast<std::size_t>(node)] = 1;
      }
      sim_coords.push_back(std::move(resid));
    }

    CompositionField realization(fs, basis.parts(), coarse.part_names());
    for (int r = 0; r < fs.nrows; ++r) {
      for (int c = 0; c < fs.ncols; ++c) {
        bool nodata = false;
        Eigen::VectorXd y(static_cast<long>(q));
        for (std::size_t ci = 0; ci < q; ++ci) {
          if (fine_trend[ci].is_nodata(r, c)) {
            nodata = true;
            break;
          }
          y[static_cast<long>(ci)] =
              fine_trend[ci].at(r, c) + sim_coords[ci].at(r, c);
        }
        const auto home = map.block_of(r, c);
        if (nodata || coarse.is_nodata(home.first, home.second)) {
          realization.set_nodata(r, c);
        } else {
          realization.set(r, c, basis.ilr_inv(y));
        }
      }
    }
    ens.realizations.push_back(std::move(realization));
  }
  return ens;
}

}  // namespace coda
