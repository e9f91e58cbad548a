#include "coda/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coda/rng.hpp"

namespace coda {

void GridSpec::validate() const {
  if (ncols < 1 || nrows < 1) {
    throw std::invalid_argument("grid: ncols and nrows must be >= 1");
  }
  if (!(cellsize_x > 0.0) || !(cellsize_y > 0.0)) {
    throw std::invalid_argument("grid: cellsize must be positive");
  }
}

ScalarField::ScalarField(GridSpec spec, double fill) : spec_(spec) {
  spec_.validate();
  v_.assign(spec_.size(), fill);
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(spec), v_(std::move(values)) {
  spec_.validate();
  if (v_.size() != spec_.size()) {
    throw std::invalid_argument("grid: value count does not match spec");
  }
}

double ScalarField::mean() const {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v_) {
    if (x != spec_.nodata) {
      s += x;
      ++n;
    }
  }
  if (n == 0) throw std::runtime_error("grid: mean of all-nodata field");
  return s / static_cast<double>(n);
}

CompositionField::CompositionField(GridSpec spec, std::size_t p,
                                   std::vector<std::string> part_names)
    : spec_(spec), part_names_(std::move(part_names)) {
  spec_.validate();
  if (p < 2) throw std::invalid_argument("composition field: p must be >= 2");
  for (std::size_t i = 0; i < p; ++i) parts_.emplace_back(spec_, spec_.nodata);
  if (part_names_.empty()) {
    for (std::size_t i = 0; i < p; ++i) {
      part_names_.push_back("part" + std::to_string(i + 1));
    }
  }
  if (part_names_.size() != p) {
    throw std::invalid_argument("composition field: part name count mismatch");
  }
}

CompositionField CompositionField::from_parts(
    std::vector<ScalarField> parts, std::vector<std::string> part_names) {
  if (parts.size() < 2) {
    throw std::invalid_argument("composition field: need at least 2 parts");
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (!parts[i].spec().same_shape(parts[0].spec())) {
      throw std::invalid_argument("composition field: misaligned part layers");
    }
  }
  CompositionField f(parts[0].spec(), parts.size(), std::move(part_names));
  f.parts_ = std::move(parts);
  f.validate();
  return f;
}

void CompositionField::set_nodata(int row, int col) {
  for (auto& p : parts_) p.set_nodata(row, col);
}

Composition CompositionField::at(int row, int col) const {
  std::vector<double> v(parts_.size());
  for (std::size_t i = 0; i < parts_.size(); ++i) v[i] = parts_[i].at(row, col);
  return closure(v);
}

void CompositionField::set(int row, int col, const Composition& c) {
  if (c.dim() != parts_.size()) {
    throw std::invalid_argument("composition field: part count mismatch");
  }
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    parts_[i].at(row, col) = c[i];
  }
}

void CompositionField::validate() const {
  for (int r = 0; r < spec_.nrows; ++r) {
    for (int c = 0; c < spec_.ncols; ++c) {
      bool any_nodata = false, all_nodata = true;
      for (const auto& p : parts_) {
        if (p.is_nodata(r, c)) any_nodata = true;
        else all_nodata = false;
      }
      if (any_nodata) {
        if (!all_nodata) {
          throw std::invalid_argument(
              "composition field: partial nodata at pixel (" +
              std::to_string(r) + "," + std::to_string(c) + ")");
        }
        continue;
      }
      try {
        (void)at(r, c);  // closure validates positivity and finiteness
      } catch (const std::exception& e) {
        throw std::invalid_argument("composition field: pixel (" +
                                    std::to_string(r) + "," +
                                    std::to_string(c) + "): " + e.what());
      }
    }
  }
}

CoarseFineMap CoarseFineMap::build(const GridSpec& fine, int fx, int fy) {
  fine.validate();
  if (fx < 1 || fy < 1) {
    throw std::invalid_argument("coarse-fine map: factors must be >= 1");
  }
  if (fine.ncols % fx != 0 || fine.nrows % fy != 0) {
    throw std::invalid_argument(
        "coarse-fine map: fine dimensions are not multiples of the factors");
  }
  CoarseFineMap m;
  m.fine_ = fine;
  m.fx_ = fx;
  m.fy_ = fy;
  m.coarse_ = fine;
  m.coarse_.ncols = fine.ncols / fx;
  m.coarse_.nrows = fine.nrows / fy;
  m.coarse_.cellsize_x = fine.cellsize_x * fx;
  m.coarse_.cellsize_y = fine.cellsize_y * fy;
  return m;
}

std::pair<int, int> CoarseFineMap::block_of(int fine_row, int fine_col) const {
  if (fine_row < 0 || fine_row >= fine_.nrows || fine_col < 0 ||
      fine_col >= fine_.ncols) {
    throw std::out_of_range("coarse-fine map: fine index out of range");
  }
  return {fine_row / fy_, fine_col / fx_};
}

std::vector<std::pair<int, int>> CoarseFineMap::fine_pixels_of(
    int coarse_row, int coarse_col) const {
  if (coarse_row < 0 || coarse_row >= coarse_.nrows || coarse_col < 0 ||
      coarse_col >= coarse_.ncols) {
    throw std::out_of_range("coarse-fine map: coarse index out of range");
  }
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(fx_) * fy_);
  for (int r = coarse_row * fy_; r < (coarse_row + 1) * fy_; ++r) {
    for (int c = coarse_col * fx_; c < (coarse_col + 1) * fx_; ++c) {
      out.emplace_back(r, c);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> CoarseFineMap::nearest_blocks(
    int fine_row, int fine_col, int count) const {
  if (count < 1) throw std::invalid_argument("nearest_blocks: count must be >= 1");
  count = std::min(count, block_count());
  const double x = fine_.center_x(fine_col);
  const double y = fine_.center_y(fine_row);
  struct Entry {
    double d2;
    int r, c;
  };
  auto cmp = [](const Entry& a, const Entry& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.r != b.r) return a.r < b.r;
    return a.c < b.c;
  };

  const auto [home_r, home_c] = block_of(fine_row, fine_col);
  const double min_cell = std::min(coarse_.cellsize_x, coarse_.cellsize_y);
  std::vector<Entry> cand;
  // Grow a block window around the target until it provably contains the
  // `count` nearest blocks: any block outside a window of half-width w is at
  // least (w - 1) * min_cell away from the target's center.
  for (int w = static_cast<int>(std::ceil(std::sqrt(double(count)))) + 1;;
       w += 2) {
    cand.clear();
    const int r0 = std::max(0, home_r - w), r1 = std::min(coarse_.nrows - 1, home_r + w);
    const int c0 = std::max(0, home_c - w), c1 = std::min(coarse_.ncols - 1, home_c + w);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double dx = coarse_.center_x(c) - x;
        const double dy = coarse_.center_y(r) - y;
        cand.push_back({dx * dx + dy * dy, r, c});
      }
    }
    const bool whole_grid = r0 == 0 && c0 == 0 && r1 == coarse_.nrows - 1 &&
                            c1 == coarse_.ncols - 1;
    if (static_cast<int>(cand.size()) < count) continue;
    std::partial_sort(cand.begin(), cand.begin() + count, cand.end(), cmp);
    const double bound = (w - 1) * min_cell;
    if (whole_grid || cand[count - 1].d2 <= bound * bound) break;
  }
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.emplace_back(cand[i].r, cand[i].c);
  return out;
}

ScalarField upscale_euclidean(const ScalarField& field, const CoarseFineMap& map) {
  if (!field.spec().same_shape(map.fine_spec())) {
    throw std::invalid_argument("upscale: field is not on the fine spec");
  }
  ScalarField out(map.coarse_spec());
  const int P = map.block_size();
  for (int br = 0; br < map.coarse_spec().nrows; ++br) {
    for (int bc = 0; bc < map.coarse_spec().ncols; ++bc) {
      double s = 0.0;
      bool nodata = false;
      for (auto [r, c] : map.fine_pixels_of(br, bc)) {
        if (field.is_nodata(r, c)) {
          nodata = true;
          break;
        }
        s += field.at(r, c);
      }
      out.at(br, bc) = nodata ? out.spec().nodata : s / P;
    }
  }
  return out;
}

CompositionField upscale_euclidean(const CompositionField& field,
                                   const CoarseFineMap& map) {
  std::vector<ScalarField> parts;
  parts.reserve(field.part_count());
  for (std::size_t i = 0; i < field.part_count(); ++i) {
    parts.push_back(upscale_euclidean(field.part(i), map));
  }
  CompositionField out(map.coarse_spec(), field.part_count(), field.part_names());
  for (int r = 0; r < map.coarse_spec().nrows; ++r) {
    for (int c = 0; c < map.coarse_spec().ncols; ++c) {
      if (parts[0].is_nodata(r, c)) continue;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        out.part(i).at(r, c) = parts[i].at(r, c);
      }
    }
  }
  return out;
}

CompositionField upscale_aitchison(const CompositionField& field,
                                   const CoarseFineMap& map) {
  if (!field.spec().same_shape(map.fine_spec())) {
    throw std::invalid_argument("upscale: field is not on the fine spec");
  }
  CompositionField out(map.coarse_spec(), field.part_count(), field.part_names());
  for (int br = 0; br < map.coarse_spec().nrows; ++br) {
    for (int bc = 0; bc < map.coarse_spec().ncols; ++bc) {
      std::vector<Composition> block;
      bool nodata = false;
      for (auto [r, c] : map.fine_pixels_of(br, bc)) {
        if (field.is_nodata(r, c)) {
          nodata = true;
          break;
        }
        block.push_back(field.at(r, c));
      }
      if (nodata) {
        out.set_nodata(br, bc);
      } else {
        out.set(br, bc, center(block));
      }
    }
  }
  return out;
}

CompositionField perturb_ilr_field(const CompositionField& field,
                                   const SimplexBasis& basis, double s2,
                                   RngStream& rng) {
  if (s2 < 0.0) {
    throw std::invalid_argument("perturb_ilr_field: negative variance");
  }
  if (basis.parts() != field.part_count()) {
    throw std::invalid_argument("perturb_ilr_field: basis/part mismatch");
  }
  const double sd = std::sqrt(s2);
  CompositionField out(field.spec(), field.part_count(), field.part_names());
  for (int r = 0; r < field.spec().nrows; ++r) {
    for (int c = 0; c < field.spec().ncols; ++c) {
      if (field.is_nodata(r, c)) {
        out.set_nodata(r, c);
        continue;
      }
      Eigen::VectorXd y = basis.ilr(field.at(r, c));
      for (long i = 0; i < y.size(); ++i) y[i] += sd * rng.gaussian();
      out.set(r, c, basis.ilr_inv(y));
    }
  }
  return out;
}

ScalarField crop_to_multiple(const ScalarField& field, int fx, int fy) {
  const GridSpec& s = field.spec();
  GridSpec out = s;
  out.ncols = (s.ncols / fx) * fx;
  out.nrows = (s.nrows / fy) * fy;
  if (out.ncols < fx || out.nrows < fy) {
    throw std::invalid_argument("crop: grid smaller than one block");
  }
  // keep the top-left corner: dropping bottom rows raises the origin
  out.origin_y = s.origin_y + (s.nrows - out.nrows) * s.cellsize_y;
  ScalarField f(out);
  for (int r = 0; r < out.nrows; ++r) {
    for (int c = 0; c < out.ncols; ++c) f.at(r, c) = field.at(r, c);
  }
  return f;
}

CompositionField crop_to_multiple(const CompositionField& field, int fx, int fy) {
  std::vector<ScalarField> parts;
  for (std::size_t i = 0; i < field.part_count(); ++i) {
    parts.push_back(crop_to_multiple(field.part(i), fx, fy));
  }
  return CompositionField::from_parts(std::move(parts), field.part_names());
}

}  // namespace coda
