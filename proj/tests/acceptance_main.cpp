// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 2-4 share one synthetic benchmark run.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "coda/bench.hpp"
#include "coda/io.hpp"

using namespace coda;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("criterion %2d (%s): %s  [%s]\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

GridSpec make_spec(int ncols, int nrows, double cell) {
  GridSpec s;
  s.ncols = ncols;
  s.nrows = nrows;
  s.cellsize_x = s.cellsize_y = cell;
  return s;
}

CompositionField random_field(const GridSpec& s, RngStream& rng) {
  CompositionField f(s, 3);
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      std::vector<double> v(3);
      for (auto& x : v) x = 0.05 + rng.uniform();
      f.set(r, c, closure(v));
    }
  }
  return f;
}

// criterion 1: equivalence of the native simplex predictor and the
// back-transformed coordinate-wise predictor on random instances
void criterion_1() {
  RngStream rng(2024);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int bc = 2 + static_cast<int>(rng.below(4));
    const int br = 2 + static_cast<int>(rng.below(4));  // 4..25 blocks
    const int f = 2 + static_cast<int>(rng.below(3));
    const GridSpec fine = make_spec(bc * f, br * f, 10.0);
    const CompositionField truth = random_field(fine, rng);
    const CoarseFineMap map = CoarseFineMap::build(fine, f);
    const CompositionField coarse = upscale_aitchison(truth, map);

    const SimplexBasis basis = rng.below(2) == 0
        ? SimplexBasis::from_sbp({{1, -1, 0}, {1, 1, -1}})
        : SimplexBasis::from_sbp({{1, 1, -1}, {1, -1, 0}});

    std::vector<ScalarField> covs;
    if (rng.below(2) == 0) {
      ScalarField cov(fine);
      for (auto& v : cov.values()) v = rng.uniform();
      covs.push_back(std::move(cov));
    }

    DownscaleConfig cfg;
    cfg.keep_weights = true;
    cfg.kriging.neighborhood =
        1 + static_cast<int>(rng.below(map.block_count()));
    const DownscaleResult res = ilr_atprcok(coarse, basis, covs, map, cfg);
    const CompositionField native = simplex_predictor(res, basis, map);
    for (int r = 0; r < fine.nrows; ++r) {
      for (int c = 0; c < fine.ncols; ++c) {
        worst = std::max(worst, aitchison_dist(native.at(r, c),
                                               res.composition->at(r, c)));
      }
    }
  }
  report(1, "predictor equivalence", worst < 1e-8,
         fmt("max distance %.3e over 100 instances", worst));
}

struct SuiteStats {
  // per method over the realizations
  std::map<std::string, std::vector<double>> mean_error;
  std::map<std::string, std::vector<double>> max_sum_dev;
  std::map<std::string, std::vector<double>> violating_fraction;
};

SuiteStats run_desk_suite() {
  SyntheticBenchOptions opt;
  const auto rows = bench_synthetic(opt, 20240817, nullptr);
  SuiteStats st;
  for (const auto& row : rows) {
    const std::string m = to_string(row.method);
    st.mean_error[m].push_back(row.mean_error);
    st.max_sum_dev[m].push_back(row.max_sum_dev);
    st.violating_fraction[m].push_back(
        row.pixels > 0 ? static_cast<double>(row.negative_pixels) /
                             static_cast<double>(row.pixels)
                       : 0.0);
  }
  return st;
}

void criteria_2_3_4(const SuiteStats& st) {
  // 2: AA and EA are constraint-exact
  double worst_dev = 0.0;
  std::int64_t violations = 0;
  for (const std::string m : {"AA", "EA"}) {
    for (double d : st.max_sum_dev.at(m)) worst_dev = std::max(worst_dev, d);
    for (double f : st.violating_fraction.at(m)) {
      if (f > 0.0) ++violations;
    }
  }
  report(2, "simplex methods constraint-exact",
         violations == 0 && worst_dev < 1e-9,
         fmt("positivity-violating runs %lld, max |sum-1| %.3e",
             static_cast<long long>(violations), worst_dev));

  // 3: EE violates positivity in at least one realization, small fraction
  const auto& ee = st.violating_fraction.at("EE");
  int runs_with_violations = 0;
  double mean_frac = 0.0;
  for (double f : ee) {
    if (f > 0.0) ++runs_with_violations;
    mean_frac += f;
  }
  mean_frac /= static_cast<double>(ee.size());
  report(3, "raw-part method violation rate",
         runs_with_violations >= 1 && mean_frac > 0.0 && mean_frac <= 0.02,
         fmt("%d/%zu runs with violations, mean violating fraction %.4f%%",
             runs_with_violations, ee.size(), 100.0 * mean_frac));

  // 4: error parity between AA and EE
  double aa = 0.0, eemean = 0.0;
  for (double e : st.mean_error.at("AA")) aa += e;
  for (double e : st.mean_error.at("EE")) eemean += e;
  aa /= static_cast<double>(st.mean_error.at("AA").size());
  eemean /= static_cast<double>(st.mean_error.at("EE").size());
  const double ratio = aa / eemean;
  report(4, "error parity AA vs EE", ratio > 0.9 && ratio < 1.1,
         fmt("mean error AA %.5f, EE %.5f, ratio %.3f", aa, eemean, ratio));
}

void criterion_5() {
  const GridSpec fine = make_spec(60, 60, 20.0);
  SyntheticOptions gen;
  gen.center = Composition({0.4, 0.35, 0.25});
  gen.sill = 0.2;
  gen.range = 400.0;
  const CompositionField truth = generate_synthetic_psfs(fine, 33, gen);
  const CoarseFineMap map = CoarseFineMap::build(fine, 5);
  const CompositionField coarse = upscale_aitchison(truth, map);
  const SimplexBasis basis = SimplexBasis::standard(3);

  auto rel_dev = [&](const DownscaleResult& res) {
    const CompositionField up = upscale_aitchison(*res.composition, map);
    double worst = 0.0;
    for (int br = 0; br < map.coarse_spec().nrows; ++br) {
      for (int bc = 0; bc < map.coarse_spec().ncols; ++bc) {
        const double d = aitchison_dist(up.at(br, bc), coarse.at(br, bc)) /
                         (1.0 + aitchison_norm(coarse.at(br, bc)));
        worst = std::max(worst, d);
      }
    }
    return worst;
  };

  DownscaleConfig global;
  global.kriging.neighborhood = map.block_count();
  const double dev_global = rel_dev(ilr_atprcok(coarse, basis, {}, map, global));

  DownscaleConfig local;  // default 25-block neighborhood
  const double dev_local = rel_dev(ilr_atprcok(coarse, basis, {}, map, local));

  report(5, "centre preservation", dev_global < 1e-6 && dev_local < 1e-2,
         fmt("rel block deviation global %.3e, local %.3e", dev_global,
             dev_local));
}

void criterion_6() {
  const GridSpec fine = make_spec(120, 120, 20.0);
  VariogramModel truth{VariogramFamily::spherical, 0.0, 1.0, 2000.0};
  RngStream rng(9, 1);
  const ScalarField field = simulate_grf(truth, fine, rng);
  const CoarseFineMap map = CoarseFineMap::build(fine, 6);
  const ScalarField coarse = upscale_euclidean(field, map);

  const EmpiricalVariogram emp = empirical_variogram(coarse);
  const VariogramModel coarse_fit =
      fit_variogram(emp, VariogramFamily::spherical);
  const VariogramModel rec =
      deconvolve(coarse_fit, map, VariogramFamily::spherical);

  const double range_err = std::abs(rec.range - truth.range) / truth.range;
  const double sill_err = std::abs(rec.sill() - truth.sill()) / truth.sill();
  report(6, "deconvolution recovery", range_err <= 0.2 && sill_err <= 0.2,
         fmt("recovered range %.0f (err %.1f%%), sill %.3f (err %.1f%%)",
             rec.range, 100.0 * range_err, rec.sill(), 100.0 * sill_err));
}

void criterion_7() {
  const VariogramModel m1{VariogramFamily::spherical, 0.00032, 0.00956, 2130.0};
  const VariogramModel m2{VariogramFamily::spherical, 0.00016, 0.00665, 2190.0};
  const double g1 = m1.gamma(2130.0), g2 = m2.gamma(2190.0);
  const bool pass =
      std::abs(g1 - 0.00988) < 1e-12 && std::abs(g2 - 0.00681) < 1e-12;
  report(7, "variogram closed forms", pass,
         fmt("gamma(2130)=%.17g, gamma(2190)=%.17g", g1, g2));
}

void criterion_8() {
  const GridSpec fine = make_spec(60, 60, 20.0);
  SyntheticOptions gen;
  gen.center = Composition({0.35, 0.4, 0.25});
  gen.sill = 0.15;
  gen.range = 500.0;
  const CompositionField truth = generate_synthetic_psfs(fine, 88, gen);
  const CoarseFineMap map = CoarseFineMap::build(fine, 6);
  const CompositionField coarse = upscale_aitchison(truth, map);
  const SimplexBasis basis = SimplexBasis::standard(3, coarse.part_names());

  DownscaleConfig dcfg;
  const DownscaleResult det = ilr_atprcok(coarse, basis, {}, map, dcfg);

  const int n_real = 50;
  const SimulationEnsemble ens =
      bsgs(coarse, basis, {}, det.point_models, map, n_real, 424242, {});

  // (c) composition invariants
  bool all_valid = true;
  for (const auto& r : ens.realizations) {
    try {
      r.validate();
    } catch (const std::exception&) {
      all_valid = false;
    }
  }

  // (a) pixelwise correlation between the ensemble ILR mean and the kriging
  // prediction, pooled over both coordinates
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::int64_t n = 0;
  for (int r = 0; r < fine.nrows; ++r) {
    for (int c = 0; c < fine.ncols; ++c) {
      Eigen::VectorXd mean_ilr = Eigen::VectorXd::Zero(2);
      for (const auto& real : ens.realizations) {
        mean_ilr += basis.ilr(real.at(r, c));
      }
      mean_ilr /= static_cast<double>(n_real);
      const Eigen::VectorXd pred = basis.ilr(det.composition->at(r, c));
      for (long i = 0; i < 2; ++i) {
        sx += mean_ilr[i];
        sy += pred[i];
        sxx += mean_ilr[i] * mean_ilr[i];
        syy += pred[i] * pred[i];
        sxy += mean_ilr[i] * pred[i];
        ++n;
      }
    }
  }
  const double corr =
      (sxy - sx * sy / n) /
      std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));

  // (b) conditioning strength relative to the field's Aitchison spread
  std::vector<Composition> all_pixels;
  for (int r = 0; r < fine.nrows; ++r)
    for (int c = 0; c < fine.ncols; ++c) all_pixels.push_back(truth.at(r, c));
  const Composition ctr = center(all_pixels);
  double var_a = 0.0;
  for (const auto& x : all_pixels) {
    var_a += std::pow(aitchison_dist(x, ctr), 2);
  }
  const double std_a = std::sqrt(var_a / static_cast<double>(all_pixels.size()));

  double worst_mean_block_dist = 0.0;
  for (const auto& real : ens.realizations) {
    const CompositionField up = upscale_aitchison(real, map);
    double acc = 0.0;
    for (int br = 0; br < map.coarse_spec().nrows; ++br) {
      for (int bc = 0; bc < map.coarse_spec().ncols; ++bc) {
        acc += aitchison_dist(up.at(br, bc), coarse.at(br, bc));
      }
    }
    acc /= static_cast<double>(map.block_count());
    worst_mean_block_dist = std::max(worst_mean_block_dist, acc);
  }

  const bool pass = all_valid && corr >= 0.9 &&
                    worst_mean_block_dist <= 0.15 * std_a;
  report(8, "conditional simulation consistency", pass,
         fmt("corr %.3f, worst mean block distance %.4f (limit %.4f), valid %s",
             corr, worst_mean_block_dist, 0.15 * std_a,
             all_valid ? "yes" : "no"));
}

void criterion_9() {
  RngStream rng(909);
  double worst_iso = 0.0, worst_boxdot = 0.0;
  for (std::size_t p : {2, 3, 4, 5}) {
    const SimplexBasis basis = SimplexBasis::standard(p);
    const Eigen::MatrixXd& V = basis.contrast_matrix();
    const Eigen::MatrixXd eye =
        Eigen::MatrixXd::Identity(static_cast<long>(p) - 1,
                                  static_cast<long>(p) - 1);
    worst_iso = std::max(worst_iso,
                         ((V * V.transpose()) - eye).cwiseAbs().maxCoeff());
    worst_iso =
        std::max(worst_iso, V.rowwise().sum().cwiseAbs().maxCoeff());
    for (int t = 0; t < 50; ++t) {
      std::vector<double> v(p);
      for (auto& x : v) x = 0.05 + rng.uniform();
      const Composition x = closure(v);
      for (auto& y : v) y = 0.05 + rng.uniform();
      const Composition y = closure(v);
      worst_iso = std::max(worst_iso,
                           aitchison_dist(basis.ilr_inv(basis.ilr(x)), x));
      worst_iso = std::max(
          worst_iso, std::abs(basis.ilr(x).dot(basis.ilr(y)) -
                              aitchison_inner(x, y)));
      worst_iso = std::max(
          worst_iso, std::abs((basis.ilr(x) - basis.ilr(y)).norm() -
                              aitchison_dist(x, y)));
      // boxdot consistency with the contrast matrix lift
      Eigen::MatrixXd B(static_cast<long>(p) - 1, static_cast<long>(p) - 1);
      for (long i = 0; i + 1 < static_cast<long>(p); ++i)
        for (long j = 0; j + 1 < static_cast<long>(p); ++j)
          B(i, j) = rng.uniform(-2.0, 2.0);
      const Composition lhs = boxdot(V.transpose() * B * V, x);
      const Composition rhs = basis.ilr_inv(B * basis.ilr(x));
      worst_boxdot = std::max(worst_boxdot, aitchison_dist(lhs, rhs));
    }
  }
  report(9, "kernel isometry suite", worst_iso < 1e-12 && worst_boxdot < 1e-10,
         fmt("max isometry defect %.3e, max boxdot defect %.3e", worst_iso,
             worst_boxdot));
}

void criterion_10() {
  RngStream rng(1010);
  double worst = 0.0;
  for (int grid_case = 0; grid_case < 10; ++grid_case) {
    const int ncols = 3 + static_cast<int>(rng.below(6));
    const int nrows = 3 + static_cast<int>(rng.below(6));
    const GridSpec fine = make_spec(ncols, nrows, 10.0);
    const CoarseFineMap map = CoarseFineMap::build(fine, 1);
    VariogramModel m{VariogramFamily::spherical, 0.05 * rng.uniform(),
                     0.5 + rng.uniform(), 20.0 + 80.0 * rng.uniform()};
    ScalarField data(fine);
    for (auto& v : data.values()) v = rng.gaussian();
    BlockCovarianceCache cache(m, map);
    KrigingConfig cfg;
    cfg.neighborhood = ncols * nrows;

    const GridSpec& s = fine;
    for (int t = 0; t < 6; ++t) {
      const int tr = static_cast<int>(rng.below(nrows));
      const int tc = static_cast<int>(rng.below(ncols));
      const AtpkSolution sol = solve_atpk(tr, tc, data, cache, cfg);

      // independent brute-force ordinary kriging
      const long n = static_cast<long>(s.size());
      Eigen::MatrixXd A(n + 1, n + 1);
      Eigen::VectorXd rhs(n + 1), vals(n);
      for (long i = 0; i < n; ++i) {
        const int ri = static_cast<int>(i) / ncols, ci = static_cast<int>(i) % ncols;
        for (long j = 0; j < n; ++j) {
          const int rj = static_cast<int>(j) / ncols, cj = static_cast<int>(j) % ncols;
          const double dx = (ci - cj) * s.cellsize_x, dy = (ri - rj) * s.cellsize_y;
          A(i, j) = m.cov(std::sqrt(dx * dx + dy * dy));
        }
        A(i, n) = A(n, i) = 1.0;
        const double dx = (ci - tc) * s.cellsize_x, dy = (ri - tr) * s.cellsize_y;
        rhs[i] = m.cov(std::sqrt(dx * dx + dy * dy));
        vals[i] = data.at(ri, ci);
      }
      A(n, n) = 0.0;
      rhs[n] = 1.0;
      const Eigen::VectorXd sol2 = A.fullPivLu().solve(rhs);
      const double brute = sol2.head(n).dot(vals);
      worst = std::max(worst, std::abs(sol.prediction - brute));
    }
  }
  report(10, "point kriging oracle", worst < 1e-8,
         fmt("max |atpk - brute force| %.3e", worst));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1();
  const SuiteStats st = run_desk_suite();
  criteria_2_3_4(st);
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("%d/10 criteria passed in %.1f s\n", 10 - g_failures, secs);
  return g_failures == 0 ? 0 : 1;
}
