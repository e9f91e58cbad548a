#pragma once

// USDA soil-texture classification of (clay, silt, sand) compositions.

#include <array>
#include <cstdint>
#include <string>

#include "coda/composition.hpp"
#include "coda/grid.hpp"

namespace coda {

enum class TextureClass : std::uint8_t {
  sand = 0,
  loamy_sand,
  sandy_loam,
  loam,
  silt_loam,
  silt,
  sandy_clay_loam,
  clay_loam,
  silty_clay_loam,
  sandy_clay,
  silty_clay,
  clay,
};

inline constexpr int kTextureClassCount = 12;

std::string to_string(TextureClass t);

/// Classify a (clay, silt, sand) composition against the USDA texture
/// triangle. Boundary points go to the first class whose inequality set is
/// satisfied in the fixed evaluation order of the decision list.
TextureClass classify_usda(const Composition& psf);

struct TextureRaster {
  ScalarField classes;  // integer class codes; nodata preserved
  std::array<std::int64_t, kTextureClassCount> frequency{};
};

TextureRaster classify_field(const CompositionField& field);

}  // namespace coda
