#include "doctest.h"

#include <cmath>

#include "coda/grid.hpp"
#include "coda/rng.hpp"

using namespace coda;

namespace {

GridSpec make_spec(int ncols, int nrows, double cell = 10.0) {
  GridSpec s;
  s.ncols = ncols;
  s.nrows = nrows;
  s.cellsize_x = s.cellsize_y = cell;
  return s;
}

CompositionField checkerboard(const GridSpec& s) {
  CompositionField f(s, 3, {"a", "b", "c"});
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      if ((r + c) % 2 == 0) {
        f.set(r, c, Composition({0.5, 0.3, 0.2}));
      } else {
        f.set(r, c, Composition({0.2, 0.3, 0.5}));
      }
    }
  }
  return f;
}

}  // namespace

TEST_CASE("grid spec geometry") {
  GridSpec s = make_spec(4, 3, 10.0);
  s.origin_x = 100.0;
  s.origin_y = 200.0;
  CHECK(s.center_x(0) == doctest::Approx(105.0));
  CHECK(s.center_x(3) == doctest::Approx(135.0));
  // row 0 is the top row
  CHECK(s.center_y(0) == doctest::Approx(225.0));
  CHECK(s.center_y(2) == doctest::Approx(205.0));

  GridSpec bad = s;
  bad.ncols = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("scalar field storage and nodata") {
  ScalarField f(make_spec(3, 2), 1.5);
  CHECK(f.at(1, 2) == 1.5);
  f.set_nodata(0, 1);
  CHECK(f.is_nodata(0, 1));
  f.at(0, 0) = 7.0;
  CHECK(f.mean() == doctest::Approx((7.0 + 4 * 1.5) / 5));
}

TEST_CASE("coarse fine map construction") {
  const GridSpec fine = make_spec(12, 8, 5.0);
  const CoarseFineMap map = CoarseFineMap::build(fine, 4, 2);
  CHECK(map.coarse_spec().ncols == 3);
  CHECK(map.coarse_spec().nrows == 4);
  CHECK(map.coarse_spec().cellsize_x == doctest::Approx(20.0));
  CHECK(map.coarse_spec().cellsize_y == doctest::Approx(10.0));
  CHECK(map.block_size() == 8);
  CHECK(map.block_count() == 12);

  CHECK(map.block_of(0, 0) == std::pair<int, int>{0, 0});
  CHECK(map.block_of(7, 11) == std::pair<int, int>{3, 2});
  CHECK(map.block_of(3, 5) == std::pair<int, int>{1, 1});

  const auto px = map.fine_pixels_of(1, 2);
  CHECK(px.size() == 8);
  for (const auto& [r, c] : px) {
    CHECK(map.block_of(r, c) == std::pair<int, int>{1, 2});
  }

  CHECK_THROWS(CoarseFineMap::build(make_spec(10, 10), 3));
}

TEST_CASE("nearest blocks agrees with exhaustive search") {
  const GridSpec fine = make_spec(30, 24, 7.0);
  const CoarseFineMap map = CoarseFineMap::build(fine, 3, 4);
  const GridSpec& cs = map.coarse_spec();
  RngStream rng(17);
  for (int t = 0; t < 40; ++t) {
    const int fr = static_cast<int>(rng.below(fine.nrows));
    const int fc = static_cast<int>(rng.below(fine.ncols));
    const int count = 1 + static_cast<int>(rng.below(map.block_count()));
    const auto got = map.nearest_blocks(fr, fc, count);
    REQUIRE(static_cast<int>(got.size()) == count);

    // brute force with the same tie-breaking
    struct Cand { double d2; int r, c; };
    std::vector<Cand> all;
    const double px = fine.center_x(fc), py = fine.center_y(fr);
    for (int r = 0; r < cs.nrows; ++r) {
      for (int c = 0; c < cs.ncols; ++c) {
        const double dx = cs.center_x(c) - px, dy = cs.center_y(r) - py;
        all.push_back({dx * dx + dy * dy, r, c});
      }
    }
    std::sort(all.begin(), all.end(), [](const Cand& a, const Cand& b) {
      if (a.d2 != b.d2) return a.d2 < b.d2;
      if (a.r != b.r) return a.r < b.r;
      return a.c < b.c;
    });
    for (int i = 0; i < count; ++i) {
      CHECK(got[static_cast<std::size_t>(i)] ==
            std::pair<int, int>{all[static_cast<std::size_t>(i)].r,
                                all[static_cast<std::size_t>(i)].c});
    }
  }
}

TEST_CASE("euclidean upscaling is the block arithmetic mean") {
  const GridSpec fine = make_spec(4, 4);
  ScalarField f(fine);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) f.at(r, c) = r * 4 + c;
  const CoarseFineMap map = CoarseFineMap::build(fine, 2);
  const ScalarField up = upscale_euclidean(f, map);
  CHECK(up.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(up.at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));

  // nodata propagates to the whole block
  f.set_nodata(0, 0);
  const ScalarField up2 = upscale_euclidean(f, map);
  CHECK(up2.is_nodata(0, 0));
  CHECK_FALSE(up2.is_nodata(0, 1));
}

TEST_CASE("aitchison upscaling is the closed geometric mean") {
  const GridSpec fine = make_spec(2, 2);
  CompositionField f(fine, 3);
  f.set(0, 0, Composition({0.2, 0.3, 0.5}));
  f.set(0, 1, Composition({0.4, 0.4, 0.2}));
  f.set(1, 0, Composition({0.1, 0.6, 0.3}));
  f.set(1, 1, Composition({0.3, 0.3, 0.4}));
  const CoarseFineMap map = CoarseFineMap::build(fine, 2);
  const CompositionField up = upscale_aitchison(f, map);

  std::vector<double> gm(3, 1.0);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < 3; ++i) gm[i] *= f.at(r, c)[i];
  for (auto& v : gm) v = std::pow(v, 0.25);
  CHECK(aitchison_dist(up.at(0, 0), closure(gm)) < 1e-12);

  // the aitchison mean equals the center of the block pixels
  const std::vector<Composition> xs = {f.at(0, 0), f.at(0, 1), f.at(1, 0),
                                       f.at(1, 1)};
  CHECK(aitchison_dist(up.at(0, 0), center(xs)) < 1e-12);
}

TEST_CASE("upscaling geometries differ on heterogeneous blocks") {
  const GridSpec fine = make_spec(2, 2);
  CompositionField f(fine, 3);
  f.set(0, 0, Composition({0.9, 0.05, 0.05}));
  f.set(0, 1, Composition({0.8, 0.1, 0.1}));
  f.set(1, 0, Composition({0.1, 0.8, 0.1}));
  f.set(1, 1, Composition({0.3, 0.3, 0.4}));
  const CoarseFineMap map = CoarseFineMap::build(fine, 2);
  const Composition e = upscale_euclidean(f, map).at(0, 0);
  const Composition a = upscale_aitchison(f, map).at(0, 0);
  CHECK(aitchison_dist(e, a) > 1e-6);
}

TEST_CASE("perturb_ilr_field zero variance is the identity") {
  const GridSpec s = make_spec(5, 4);
  const CompositionField f = checkerboard(s);
  const SimplexBasis basis = SimplexBasis::standard(3);
  RngStream rng(3);
  const CompositionField g = perturb_ilr_field(f, basis, 0.0, rng);
  for (int r = 0; r < s.nrows; ++r)
    for (int c = 0; c < s.ncols; ++c)
      CHECK(aitchison_dist(f.at(r, c), g.at(r, c)) < 1e-12);
}

TEST_CASE("perturb_ilr_field noise has the requested variance") {
  GridSpec s = make_spec(60, 60);
  CompositionField f(s, 3);
  for (int r = 0; r < s.nrows; ++r)
    for (int c = 0; c < s.ncols; ++c) f.set(r, c, neutral(3));
  const SimplexBasis basis = SimplexBasis::standard(3);
  RngStream rng(31);
  const double s2 = 0.04;
  const CompositionField g = perturb_ilr_field(f, basis, s2, rng);
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      const Eigen::VectorXd y = basis.ilr(g.at(r, c));
      for (long i = 0; i < y.size(); ++i) {
        sum += y[i];
        sum2 += y[i] * y[i];
        ++n;
      }
    }
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(s2).epsilon(0.1));
}

TEST_CASE("crop_to_multiple keeps the top-left subgrid") {
  GridSpec s = make_spec(7, 5, 10.0);
  s.origin_y = 1000.0;
  ScalarField f(s);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 7; ++c) f.at(r, c) = r * 10 + c;
  const ScalarField g = crop_to_multiple(f, 3, 2);
  CHECK(g.spec().ncols == 6);
  CHECK(g.spec().nrows == 4);
  CHECK(g.at(0, 0) == 0.0);
  CHECK(g.at(3, 5) == 35.0);
  // top edge unchanged means the origin shifts up by the dropped row
  CHECK(g.spec().origin_y == doctest::Approx(1010.0));
  CHECK(g.spec().origin_x == doctest::Approx(0.0));
  CHECK(g.spec().center_y(0) == doctest::Approx(s.center_y(0)));
}

TEST_CASE("composition field validate flags broken pixels") {
  const GridSpec s = make_spec(2, 2);
  CompositionField f = checkerboard(s);
  CHECK_NOTHROW(f.validate());
  f.part(0).at(0, 0) = -0.1;
  CHECK_THROWS(f.validate());
}
