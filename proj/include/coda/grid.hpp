#pragma once

// Raster data model: aligned coarse/fine grids, block membership and
// upscaling operators in Euclidean and Aitchison geometry.

#include <optional>
#include <string>
#include <vector>

#include "coda/composition.hpp"

namespace coda {

class RngStream;

/// Grid header. Row 0 of the value array is the top row of the map
/// (ESRI ASCII convention); (origin_x, origin_y) is the lower-left corner.
struct GridSpec {
  int ncols = 0;
  int nrows = 0;
  double cellsize_x = 1.0;
  double cellsize_y = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double nodata = -9999.0;

  std::size_t size() const {
    return static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows);
  }
  bool square_cells() const { return cellsize_x == cellsize_y; }

  double center_x(int col) const { return origin_x + (col + 0.5) * cellsize_x; }
  double center_y(int row) const {
    return origin_y + (nrows - 1 - row + 0.5) * cellsize_y;
  }

  bool same_shape(const GridSpec& o) const {
    return ncols == o.ncols && nrows == o.nrows &&
           cellsize_x == o.cellsize_x && cellsize_y == o.cellsize_y &&
           origin_x == o.origin_x && origin_y == o.origin_y;
  }

  void validate() const;
};

/// Row-major raster of reals; nodata cells hold the sentinel value.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec spec, double fill = 0.0);
  ScalarField(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  double at(int row, int col) const {
    return v_[static_cast<std::size_t>(row) * spec_.ncols + col];
  }
  double& at(int row, int col) {
    return v_[static_cast<std::size_t>(row) * spec_.ncols + col];
  }
  bool is_nodata(int row, int col) const { return at(row, col) == spec_.nodata; }
  void set_nodata(int row, int col) { at(row, col) = spec_.nodata; }

  /// Mean over non-nodata cells.
  double mean() const;

 private:
  GridSpec spec_;
  std::vector<double> v_;
};

/// A stack of p part rasters forming a composition at every non-nodata pixel.
class CompositionField {
 public:
  CompositionField() = default;
  CompositionField(GridSpec spec, std::size_t p,
                   std::vector<std::string> part_names = {});
  static CompositionField from_parts(std::vector<ScalarField> parts,
                                     std::vector<std::string> part_names = {});

  const GridSpec& spec() const { return spec_; }
  std::size_t part_count() const { return parts_.size(); }
  const std::vector<std::string>& part_names() const { return part_names_; }
  const ScalarField& part(std::size_t i) const { return parts_[i]; }
  ScalarField& part(std::size_t i) { return parts_[i]; }

  bool is_nodata(int row, int col) const { return parts_[0].is_nodata(row, col); }
  void set_nodata(int row, int col);
  Composition at(int row, int col) const;
  void set(int row, int col, const Composition& c);

  /// Throws if any non-nodata pixel fails the composition invariants.
  void validate() const;

 private:
  GridSpec spec_;
  std::vector<ScalarField> parts_;
  std::vector<std::string> part_names_;
};

/// Nested coarse/fine grid pair with integer refinement factors per axis.
class CoarseFineMap {
 public:
  /// Derives the coarse spec by aggregating fx x fy fine cells per block.
  /// The fine dimensions must be exact multiples of the factors.
  static CoarseFineMap build(const GridSpec& fine, int fx, int fy);
  static CoarseFineMap build(const GridSpec& fine, int f) {
    return build(fine, f, f);
  }

  const GridSpec& fine_spec() const { return fine_; }
  const GridSpec& coarse_spec() const { return coarse_; }
  int fx() const { return fx_; }
  int fy() const { return fy_; }
  int block_size() const { return fx_ * fy_; }  // P
  int block_count() const { return coarse_.ncols * coarse_.nrows; }  // M

  std::pair<int, int> block_of(int fine_row, int fine_col) const;
  std::vector<std::pair<int, int>> fine_pixels_of(int coarse_row,
                                                  int coarse_col) const;

  /// The `count` coarse blocks nearest (center-to-center) to the given fine
  /// pixel, ties broken by (row, col) lexicographic order of the block index.
  std::vector<std::pair<int, int>> nearest_blocks(int fine_row, int fine_col,
                                                  int count) const;

 private:
  GridSpec fine_, coarse_;
  int fx_ = 1, fy_ = 1;
};

/// Block arithmetic means; a block containing any nodata fine pixel is nodata.
ScalarField upscale_euclidean(const ScalarField& field, const CoarseFineMap& map);
CompositionField upscale_euclidean(const CompositionField& field,
                                   const CoarseFineMap& map);

/// Closed part-wise block geometric means (the discrete Aitchison average).
CompositionField upscale_aitchison(const CompositionField& field,
                                   const CoarseFineMap& map);

/// Adds iid zero-mean Gaussian noise with variance s2 to every ILR coordinate
/// at every non-nodata pixel and back-transforms.
CompositionField perturb_ilr_field(const CompositionField& field,
                                   const SimplexBasis& basis, double s2,
                                   RngStream& rng);

/// Crop the top-left sub-grid whose dimensions are exact multiples of (fx,fy).
ScalarField crop_to_multiple(const ScalarField& field, int fx, int fy);
CompositionField crop_to_multiple(const CompositionField& field, int fx, int fy);

}  // namespace coda
