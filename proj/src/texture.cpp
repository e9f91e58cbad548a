#include "coda/texture.hpp"

#include <stdexcept>

namespace coda {

std::string to_string(TextureClass t) {
  switch (t) {
    case TextureClass::sand: return "sand";
    case TextureClass::loamy_sand: return "loamy sand";
    case TextureClass::sandy_loam: return "sandy loam";
    case TextureClass::loam: return "loam";
    case TextureClass::silt_loam: return "silt loam";
    case TextureClass::silt: return "silt";
    case TextureClass::sandy_clay_loam: return "sandy clay loam";
    case TextureClass::clay_loam: return "clay loam";
    case TextureClass::silty_clay_loam: return "silty clay loam";
    case TextureClass::sandy_clay: return "sandy clay";
    case TextureClass::silty_clay: return "silty clay";
    case TextureClass::clay: return "clay";
  }
  throw std::logic_error("unknown texture class");
}

TextureClass classify_usda(const Composition& psf) {
  if (psf.dim() != 3) {
    throw std::invalid_argument("classify_usda: need (clay, silt, sand)");
  }
  // percentages, as in the USDA boundary tables
  const double clay = 100.0 * psf[0];
  const double silt = 100.0 * psf[1];
  const double sand = 100.0 * psf[2];

  // Decision list transcribed from the USDA textural class limits; evaluated
  // in this fixed order so every boundary point has a deterministic owner.
  if (silt + 1.5 * clay < 15.0) return TextureClass::sand;
  if (silt + 2.0 * clay < 30.0) return TextureClass::loamy_sand;
  if ((clay >= 7.0 && clay < 20.0 && sand > 52.0) ||
      (clay < 7.0 && silt < 50.0)) {
    return TextureClass::sandy_loam;
  }
  if (clay >= 7.0 && clay < 27.0 && silt >= 28.0 && silt < 50.0 && sand <= 52.0) {
    return TextureClass::loam;
  }
  if (silt >= 50.0 && ((clay >= 12.0 && clay < 27.0) || (silt < 80.0 && clay < 12.0))) {
    return TextureClass::silt_loam;
  }
  if (silt >= 80.0 && clay < 12.0) return TextureClass::silt;
  if (clay >= 20.0 && clay < 35.0 && silt < 28.0 && sand > 45.0) {
    return TextureClass::sandy_clay_loam;
  }
  if (clay >= 27.0 && clay < 40.0 && sand > 20.0 && sand <= 45.0) {
    return TextureClass::clay_loam;
  }
  if (clay >= 27.0 && clay < 40.0 && sand <= 20.0) {
    return TextureClass::silty_clay_loam;
  }
  if (clay >= 35.0 && sand > 45.0) return TextureClass::sandy_clay;
  if (clay >= 40.0 && silt >= 40.0) return TextureClass::silty_clay;
  if (clay >= 40.0 && sand <= 45.0 && silt < 40.0) return TextureClass::clay;
  // remaining slivers sit on the loam side of the shared edges
  if (silt >= 28.0 && clay < 27.0) return TextureClass::loam;
  return TextureClass::sandy_loam;
}

TextureRaster classify_field(const CompositionField& field) {
  if (field.part_count() != 3) {
    throw std::invalid_argument("classify_field: need a 3-part field");
  }
  const GridSpec& s = field.spec();
  TextureRaster out{ScalarField(s, s.nodata), {}};
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      if (field.is_nodata(r, c)) continue;
      const TextureClass t = classify_usda(field.at(r, c));
      out.classes.at(r, c) = static_cast<double>(static_cast<int>(t));
      ++out.frequency[static_cast<std::size_t>(t)];
    }
  }
  return out;
}

}  // namespace coda
