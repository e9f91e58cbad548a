#include "coda/variogram.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace coda {

std::string to_string(VariogramFamily f) {
  switch (f) {
    case VariogramFamily::spherical: return "spherical";
    case VariogramFamily::exponential: return "exponential";
    case VariogramFamily::gaussian: return "gaussian";
  }
  throw std::logic_error("unknown variogram family");
}

VariogramFamily variogram_family_from_string(const std::string& s) {
  if (s == "spherical") return VariogramFamily::spherical;
  if (s == "exponential") return VariogramFamily::exponential;
  if (s == "gaussian") return VariogramFamily::gaussian;
  throw std::invalid_argument("unknown variogram family: " + s);
}

double VariogramModel::gamma(double h) const {
  if (h < 0.0) throw std::invalid_argument("variogram: negative lag");
  if (h == 0.0) return 0.0;
  double structured = 0.0;
  switch (family) {
    case VariogramFamily::spherical: {
      const double u = h / range;
      structured = u >= 1.0 ? 1.0 : 1.5 * u - 0.5 * u * u * u;
      break;
    }
    case VariogramFamily::exponential:
      structured = 1.0 - std::exp(-3.0 * h / range);
      break;
    case VariogramFamily::gaussian:
      structured = 1.0 - std::exp(-3.0 * h * h / (range * range));
      break;
  }
  return nugget + psill * structured;
}

double VariogramModel::cov(double h) const {
  if (h < 0.0) throw std::invalid_argument("variogram: negative lag");
  if (h == 0.0) return nugget + psill;
  return nugget + psill - gamma(h);
}

std::string VariogramModel::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "family " << to_string(family) << "\n"
     << "nugget " << nugget << "\n"
     << "psill " << psill << "\n"
     << "range " << range << "\n";
  return os.str();
}

VariogramModel VariogramModel::from_text(const std::string& text) {
  VariogramModel m;
  std::istringstream is(text);
  std::string key;
  bool have_family = false, have_nugget = false, have_psill = false,
       have_range = false;
  while (is >> key) {
    if (key == "family") {
      std::string v;
      is >> v;
      m.family = variogram_family_from_string(v);
      have_family = true;
    } else if (key == "nugget") {
      is >> m.nugget;
      have_nugget = true;
    } else if (key == "psill") {
      is >> m.psill;
      have_psill = true;
    } else if (key == "range") {
      is >> m.range;
      have_range = true;
    } else {
      throw std::invalid_argument("variogram model file: unknown key " + key);
    }
  }
  if (!have_family || !have_nugget || !have_psill || !have_range ||
      !(m.range > 0.0) || m.nugget < 0.0 || m.psill < 0.0) {
    throw std::invalid_argument("variogram model file: incomplete or invalid");
  }
  return m;
}

EmpiricalVariogram empirical_variogram(const ScalarField& field,
                                       double lag_width, double max_dist) {
  const GridSpec& s = field.spec();
  if (lag_width <= 0.0) lag_width = std::max(s.cellsize_x, s.cellsize_y);
  if (max_dist <= 0.0) {
    const double w = s.ncols * s.cellsize_x, h = s.nrows * s.cellsize_y;
    max_dist = 0.5 * std::sqrt(w * w + h * h);
  }
  std::size_t informative = 0;
  for (int r = 0; r < s.nrows && informative < 2; ++r) {
    for (int c = 0; c < s.ncols && informative < 2; ++c) {
      if (!field.is_nodata(r, c)) ++informative;
    }
  }
  if (informative < 2) {
    throw std::invalid_argument("empirical variogram: fewer than 2 data pixels");
  }

  const int nbins = static_cast<int>(std::ceil(max_dist / lag_width));
  std::vector<double> sum(nbins, 0.0);
  std::vector<std::int64_t> cnt(nbins, 0);

  // Enumerate lag offsets once; each offset pairs every pixel with its
  // translate, so each unordered pair is visited exactly once.
  const int max_dr = std::min(s.nrows - 1,
                              static_cast<int>(max_dist / s.cellsize_y) + 1);
  const int max_dc = std::min(s.ncols - 1,
                              static_cast<int>(max_dist / s.cellsize_x) + 1);
  for (int dr = 0; dr <= max_dr; ++dr) {
    const int c_lo = (dr == 0) ? 1 : -max_dc;
    for (int dc = c_lo; dc <= max_dc; ++dc) {
      const double dx = dc * s.cellsize_x, dy = dr * s.cellsize_y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d > max_dist) continue;
      const int bin = std::min(nbins - 1, static_cast<int>(d / lag_width));
      const int r0 = 0, r1 = s.nrows - dr;
      const int col0 = std::max(0, -dc), col1 = std::min(s.ncols, s.ncols - dc);
      for (int r = r0; r < r1; ++r) {
        for (int c = col0; c < col1; ++c) {
          const double a = field.at(r, c);
          if (a == s.nodata) continue;
          const double b = field.at(r + dr, c + dc);
          if (b == s.nodata) continue;
          const double diff = a - b;
          sum[bin] += 0.5 * diff * diff;
          cnt[bin] += 1;
        }
      }
    }
  }

  EmpiricalVariogram out;
  for (int i = 0; i < nbins; ++i) {
    if (cnt[i] == 0) continue;
    out.lag.push_back((i + 0.5) * lag_width);
    out.semivariance.push_back(sum[i] / static_cast<double>(cnt[i]));
    out.pairs.push_back(cnt[i]);
  }
  return out;
}

namespace {

double wls_objective(const EmpiricalVariogram& emp, const VariogramModel& m) {
  double obj = 0.0;
  for (std::size_t i = 0; i < emp.lag.size(); ++i) {
    const double w =
        static_cast<double>(emp.pairs[i]) / (emp.lag[i] * emp.lag[i]);
    const double r = emp.semivariance[i] - m.gamma(emp.lag[i]);
    obj += w * r * r;
  }
  return obj;
}

VariogramModel refine_pattern_search(const EmpiricalVariogram& emp,
                                     VariogramModel m, double max_lag,
                                     bool fix_nugget) {
  double best = wls_objective(emp, m);
  std::array<double, 3> step = {0.25 * (m.nugget + m.psill) + 1e-12,
                                0.25 * (m.nugget + m.psill) + 1e-12,
                                0.25 * m.range};
  for (int it = 0; it < 200; ++it) {
    bool improved = false;
    for (int p = fix_nugget ? 1 : 0; p < 3; ++p) {
      for (double sgn : {1.0, -1.0}) {
        VariogramModel cand = m;
        double* field = p == 0 ? &cand.nugget : p == 1 ? &cand.psill : &cand.range;
        *field += sgn * step[p];
        if (cand.nugget < 0.0 || cand.psill < 0.0 ||
            cand.range <= 0.0 || cand.range > 10.0 * max_lag) {
          continue;
        }
        const double obj = wls_objective(emp, cand);
        if (obj < best) {
          best = obj;
          m = cand;
          improved = true;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
      if (step[2] < 1e-12 * max_lag) break;
    }
  }
  return m;
}

}  // namespace

namespace {

VariogramModel fit_impl(const EmpiricalVariogram& emp, VariogramFamily family,
                        std::optional<double> fixed_nugget) {
  if (emp.lag.size() < 3) {
    throw std::invalid_argument("variogram fit: need at least 3 lags");
  }
  const double max_semi =
      *std::max_element(emp.semivariance.begin(), emp.semivariance.end());
  if (max_semi <= 0.0) {
    throw std::runtime_error("variogram fit: degenerate all-zero variogram");
  }
  const double max_lag = emp.lag.back();

  VariogramModel best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int ri = 1; ri <= 24; ++ri) {
    for (int si = 0; si <= 12; ++si) {
      for (int ni = 0; ni <= 6; ++ni) {
        VariogramModel m;
        m.family = family;
        m.range = max_lag * 1.5 * ri / 24.0;
        m.psill = max_semi * 1.5 * si / 12.0;
        m.nugget = fixed_nugget ? *fixed_nugget : max_semi * ni / 6.0;
        const double obj = wls_objective(emp, m);
        if (obj < best_obj) {
          best_obj = obj;
          best = m;
        }
        if (fixed_nugget) break;
      }
    }
  }
  return refine_pattern_search(emp, best, max_lag, fixed_nugget.has_value());
}

}  // namespace

VariogramModel fit_variogram(const EmpiricalVariogram& emp,
                             VariogramFamily family) {
  return fit_impl(emp, family, std::nullopt);
}

namespace {

// Mean semivariance between the P fine centers of two congruent blocks whose
// corners are offset by (hx, hy). The double sum over P x P center pairs
// collapses to distinct offsets weighted by their multiplicity.
double mean_block_pair_gamma(const VariogramModel& m, const CoarseFineMap& map,
                             double hx, double hy) {
  const double dx = map.fine_spec().cellsize_x;
  const double dy = map.fine_spec().cellsize_y;
  const int fx = map.fx(), fy = map.fy();
  double acc = 0.0;
  for (int di = -(fy - 1); di <= fy - 1; ++di) {
    const double wy = fy - std::abs(di);
    const double ddy = hy + di * dy;
    for (int dj = -(fx - 1); dj <= fx - 1; ++dj) {
      const double wx = fx - std::abs(dj);
      const double ddx = hx + dj * dx;
      acc += wy * wx * m.gamma(std::sqrt(ddx * ddx + ddy * ddy));
    }
  }
  const double P = static_cast<double>(fx) * fy;
  return acc / (P * P);
}

}  // namespace

double regularized_gamma(const VariogramModel& point_model,
                         const CoarseFineMap& map, double h) {
  if (h < 0.0) throw std::invalid_argument("regularized_gamma: negative lag");
  if (h == 0.0) return 0.0;
  const double between = mean_block_pair_gamma(point_model, map, h, 0.0);
  const double within = mean_block_pair_gamma(point_model, map, 0.0, 0.0);
  return between - within;
}

VariogramModel deconvolve(const VariogramModel& coarse_model,
                          const CoarseFineMap& map, VariogramFamily family,
                          DeconvolutionReport* report) {
  if (report) *report = DeconvolutionReport{};
  if (map.block_size() == 1) {
    VariogramModel out = coarse_model;
    out.family = family;
    return out;
  }

  const double coarse_cell =
      std::max(map.coarse_spec().cellsize_x, map.coarse_spec().cellsize_y);
  const int nlags = 15;
  std::vector<double> lags(nlags);
  for (int i = 0; i < nlags; ++i) lags[i] = (i + 1) * coarse_cell;

  auto rel_diff = [&](const VariogramModel& cand) {
    double num = 0.0, den = 0.0;
    for (double h : lags) {
      const double w = 1.0 / (h * h);
      num += w * std::abs(regularized_gamma(cand, map, h) -
                          coarse_model.gamma(h));
      den += w * std::abs(coarse_model.gamma(h));
    }
    return den > 0.0 ? num / den : num;
  };

  // A pure nugget component regularizes to nugget / P exactly for disjoint
  // blocks, so the point nugget is identified in closed form and pinned
  // during the refits; only psill and range are iterated.
  const double point_nugget =
      coarse_model.nugget * static_cast<double>(map.block_size());

  VariogramModel cand = coarse_model;
  cand.family = family;
  cand.nugget = point_nugget;
  VariogramModel best = cand;
  double best_diff = rel_diff(cand);
  double prev_diff = best_diff;

  constexpr int kMaxIter = 35;
  int it = 0;
  for (; it < kMaxIter; ++it) {
    // Rescale the candidate's point values so its regularization moves
    // toward the coarse model, then refit the parametric family.
    EmpiricalVariogram target;
    for (double h : lags) {
      const double reg = regularized_gamma(cand, map, h);
      const double g = cand.gamma(h);
      double t = reg > 1e-300 ? g * coarse_model.gamma(h) / reg : g;
      target.lag.push_back(h);
      target.semivariance.push_back(std::max(t, 0.0));
      target.pairs.push_back(1);
    }
    VariogramModel next;
    try {
      next = fit_impl(target, family, point_nugget);
    } catch (const std::exception&) {
      break;
    }
    const double d = rel_diff(next);
    if (d < best_diff) {
      best = next;
      best_diff = d;
    }
    cand = next;
    const bool settled =
        std::abs(prev_diff - d) < 1e-3 * std::max(best_diff, 1e-12);
    prev_diff = d;
    if (settled || best_diff < 1e-6) {
      ++it;
      break;
    }
  }

  if (report) {
    report->iterations = it;
    report->rel_diff = best_diff;
    report->converged = it < kMaxIter;
  }
  return best;
}

BlockCovarianceCache::BlockCovarianceCache(const VariogramModel& model,
                                           const CoarseFineMap& map)
    : model_(model), map_(map) {}

double BlockCovarianceCache::block_block(int br1, int bc1, int br2, int bc2) {
  const std::uint32_t adr = static_cast<std::uint32_t>(std::abs(br2 - br1));
  const std::uint32_t adc = static_cast<std::uint32_t>(std::abs(bc2 - bc1));
  const std::uint64_t key = (static_cast<std::uint64_t>(adr) << 32) | adc;
  if (auto itr = bb_.find(key); itr != bb_.end()) return itr->second;

  const GridSpec& fs = map_.fine_spec();
  const double hx = adc * map_.coarse_spec().cellsize_x;
  const double hy = adr * map_.coarse_spec().cellsize_y;
  const int fx = map_.fx(), fy = map_.fy();
  double acc = 0.0;
  for (int di = -(fy - 1); di <= fy - 1; ++di) {
    const double wy = fy - std::abs(di);
    const double ddy = hy + di * fs.cellsize_y;
    for (int dj = -(fx - 1); dj <= fx - 1; ++dj) {
      const double wx = fx - std::abs(dj);
      const double ddx = hx + dj * fs.cellsize_x;
      acc += wy * wx * model_.cov(std::sqrt(ddx * ddx + ddy * ddy));
    }
  }
  const double P = static_cast<double>(map_.block_size());
  const double value = acc / (P * P);
  bb_.emplace(key, value);
  return value;
}

double BlockCovarianceCache::point_block(int fine_row, int fine_col, int br,
                                         int bc) {
  const std::int64_t dr = static_cast<std::int64_t>(br) * map_.fy() - fine_row;
  const std::int64_t dc = static_cast<std::int64_t>(bc) * map_.fx() - fine_col;
  const std::uint64_t key =
      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(dr)) << 32) |
      static_cast<std::uint32_t>(dc);
  if (auto itr = pb_.find(key); itr != pb_.end()) return itr->second;

  const GridSpec& fs = map_.fine_spec();
  double acc = 0.0;
  for (int i = 0; i < map_.fy(); ++i) {
    for (int j = 0; j < map_.fx(); ++j) {
      const double ddx = (dc + j) * fs.cellsize_x;
      const double ddy = (dr + i) * fs.cellsize_y;
      acc += model_.cov(std::sqrt(ddx * ddx + ddy * ddy));
    }
  }
  const double value = acc / static_cast<double>(map_.block_size());
  pb_.emplace(key, value);
  return value;
}

double BlockCovarianceCache::point_point(int fr1, int fc1, int fr2,
                                         int fc2) const {
  const GridSpec& fs = map_.fine_spec();
  const double ddx = (fc2 - fc1) * fs.cellsize_x;
  const double ddy = (fr2 - fr1) * fs.cellsize_y;
  return model_.cov(std::sqrt(ddx * ddx + ddy * ddy));
}

}  // namespace coda
