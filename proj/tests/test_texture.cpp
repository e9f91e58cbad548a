#include "doctest.h"

#include "coda/texture.hpp"

using namespace coda;

namespace {

Composition pct(double clay, double silt, double sand) {
  return closure(std::vector<double>{clay, silt, sand});
}

}  // namespace

TEST_CASE("known interior points classify correctly") {
  CHECK(classify_usda(pct(5, 5, 90)) == TextureClass::sand);
  CHECK(classify_usda(pct(5, 12, 83)) == TextureClass::loamy_sand);
  CHECK(classify_usda(pct(10, 25, 65)) == TextureClass::sandy_loam);
  CHECK(classify_usda(pct(18, 40, 42)) == TextureClass::loam);
  CHECK(classify_usda(pct(15, 65, 20)) == TextureClass::silt_loam);
  CHECK(classify_usda(pct(5, 88, 7)) == TextureClass::silt);
  CHECK(classify_usda(pct(27, 13, 60)) == TextureClass::sandy_clay_loam);
  CHECK(classify_usda(pct(33, 33, 34)) == TextureClass::clay_loam);
  CHECK(classify_usda(pct(33, 57, 10)) == TextureClass::silty_clay_loam);
  CHECK(classify_usda(pct(38, 8, 54)) == TextureClass::sandy_clay);
  CHECK(classify_usda(pct(45, 48, 7)) == TextureClass::silty_clay);
  CHECK(classify_usda(pct(60, 20, 20)) == TextureClass::clay);
}

TEST_CASE("classification is total on a dense simplex scan") {
  // every strictly positive percent triple must receive exactly one class;
  // classify_usda throwing or looping would fail the scan
  int counts[kTextureClassCount] = {};
  int total = 0;
  for (int clay10 = 1; clay10 < 1000; clay10 += 3) {
    for (int silt10 = 1; silt10 < 1000 - clay10; silt10 += 3) {
      const double clay = clay10 / 10.0;
      const double silt = silt10 / 10.0;
      const double sand = 100.0 - clay - silt;
      if (sand <= 0.05) continue;
      const TextureClass t = classify_usda(pct(clay, silt, sand));
      ++counts[static_cast<int>(t)];
      ++total;
    }
  }
  int sum = 0;
  for (int c : counts) {
    CHECK(c > 0);  // every class is reachable
    sum += c;
  }
  CHECK(sum == total);
}

TEST_CASE("boundary points have a deterministic owner") {
  // points on shared edges: repeated evaluation is stable and in-range
  const Composition edge1 = pct(20, 40, 40);   // loam / silt loam boundary area
  const Composition edge2 = pct(27, 28, 45);
  const Composition edge3 = pct(40, 40, 20);
  CHECK(classify_usda(edge1) == classify_usda(edge1));
  CHECK(classify_usda(edge2) == classify_usda(edge2));
  CHECK(classify_usda(edge3) == TextureClass::silty_clay);
}

TEST_CASE("classification is scale invariant") {
  // fractions vs percent-like inputs give the same class after closure
  const Composition frac = pct(0.33, 0.33, 0.34);
  const Composition scaled = pct(33, 33, 34);
  CHECK(classify_usda(frac) == classify_usda(scaled));
}

TEST_CASE("classify_field fills classes and frequencies") {
  GridSpec s;
  s.ncols = 3;
  s.nrows = 1;
  CompositionField f(s, 3, {"clay", "silt", "sand"});
  f.set(0, 0, pct(60, 20, 20));
  f.set(0, 1, pct(5, 5, 90));
  f.set(0, 2, pct(5, 88, 7));
  const TextureRaster tex = classify_field(f);
  CHECK(tex.classes.at(0, 0) == static_cast<double>(static_cast<int>(TextureClass::clay)));
  CHECK(tex.classes.at(0, 1) == static_cast<double>(static_cast<int>(TextureClass::sand)));
  CHECK(tex.classes.at(0, 2) == static_cast<double>(static_cast<int>(TextureClass::silt)));
  CHECK(tex.frequency[static_cast<std::size_t>(TextureClass::clay)] == 1);

  std::int64_t total = 0;
  for (auto n : tex.frequency) total += n;
  CHECK(total == 3);

  f.set_nodata(0, 1);
  const TextureRaster tex2 = classify_field(f);
  CHECK(tex2.classes.is_nodata(0, 1));
  total = 0;
  for (auto n : tex2.frequency) total += n;
  CHECK(total == 2);
}

TEST_CASE("rejects non-ternary input") {
  CHECK_THROWS(classify_usda(Composition({0.5, 0.5})));
}
