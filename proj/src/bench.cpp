#include "coda/bench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coda {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::vector<std::string> bench_csv_header() {
  return {"setting",   "method", "pixels",   "mean_error",      "std_error",
          "q05",       "median", "q95",      "max_error",       "negative_pixels",
          "max_sum_dev"};
}

std::vector<std::string> bench_csv_row(const BenchRow& row) {
  return {row.setting,
          to_string(row.method),
          std::to_string(row.pixels),
          fmt(row.mean_error),
          fmt(row.std_error),
          fmt(row.q05),
          fmt(row.median),
          fmt(row.q95),
          fmt(row.max_error),
          std::to_string(row.negative_pixels),
          fmt(row.max_sum_dev)};
}

BenchRow summarize_prediction(const std::vector<ScalarField>& parts,
                              const CompositionField& reference,
                              MethodTag method, std::string setting) {
  BenchRow row;
  row.setting = std::move(setting);
  row.method = method;
  const GridSpec& s = reference.spec();
  std::vector<double> errors;
  errors.reserve(s.size());
  for (int r = 0; r < s.nrows; ++r) {
    for (int c = 0; c < s.ncols; ++c) {
      if (reference.is_nodata(r, c)) continue;
      bool missing = false;
      for (const auto& p : parts) {
        if (p.is_nodata(r, c)) missing = true;
      }
      if (missing) continue;
      const Composition ref = reference.at(r, c);
      double e2 = 0.0, sum = 0.0;
      bool negative = false;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const double v = parts[i].at(r, c);
        const double d = v - ref[i];
        e2 += d * d;
        sum += v;
        if (v <= 0.0) negative = true;
      }
      errors.push_back(std::sqrt(e2));
      row.max_sum_dev = std::max(row.max_sum_dev, std::abs(sum - 1.0));
      if (negative) ++row.negative_pixels;
    }
  }
  row.pixels = static_cast<std::int64_t>(errors.size());
  if (!errors.empty()) {
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    double var = 0.0;
    for (double e : errors) var += (e - mean) * (e - mean);
    var /= static_cast<double>(errors.size());
    std::sort(errors.begin(), errors.end());
    row.mean_error = mean;
    row.std_error = std::sqrt(var);
    row.q05 = quantile(errors, 0.05);
    row.median = quantile(errors, 0.5);
    row.q95 = quantile(errors, 0.95);
    row.max_error = errors.back();
  }
  return row;
}

BenchRow run_method(MethodTag method, const CompositionField& fine_truth,
                    const SimplexBasis& basis, const CoarseFineMap& map,
                    const DownscaleConfig& config,
                    std::vector<ScalarField>* parts_out) {
  const bool aitchison_up = method == MethodTag::AE || method == MethodTag::AA;
  const bool aitchison_down = method == MethodTag::EA || method == MethodTag::AA;
  const CompositionField coarse = aitchison_up
                                      ? upscale_aitchison(fine_truth, map)
                                      : upscale_euclidean(fine_truth, map);
  std::vector<ScalarField> parts;
  if (aitchison_down) {
    DownscaleResult res = ilr_atprcok(coarse, basis, {}, map, config);
    for (std::size_t i = 0; i < res.composition->part_count(); ++i) {
      parts.push_back(res.composition->part(i));
    }
  } else {
    DownscaleResult res = atprcok_euclidean(coarse, {}, map, config);
    parts = std::move(res.components);
  }
  BenchRow row = summarize_prediction(parts, fine_truth, method, "");
  if (parts_out) *parts_out = std::move(parts);
  return row;
}

void SyntheticBenchOptions::apply_full_profile() {
  ncols = 500;
  nrows = 458;
  realizations = 100;
  f_max = 30;
}

std::vector<BenchRow> bench_synthetic(const SyntheticBenchOptions& options,
                                      std::uint64_t seed, std::ostream* log) {
  GridSpec full;
  full.ncols = options.ncols;
  full.nrows = options.nrows;
  full.cellsize_x = full.cellsize_y = options.cellsize;

  const SimplexBasis basis = SimplexBasis::standard(3, {"clay", "silt", "sand"});
  std::vector<BenchRow> rows;
  for (int real = 0; real < options.realizations; ++real) {
    RngStream pick(derive_seed(seed, static_cast<std::uint64_t>(real)), 0);
    const int f = options.f_min +
                  static_cast<int>(pick.below(
                      static_cast<std::uint64_t>(options.f_max - options.f_min + 1)));
    SyntheticOptions gen;
    gen.range = options.range;
    SyntheticTruth truth;
    const CompositionField field = generate_synthetic_psfs(
        full, derive_seed(seed, 100000 + static_cast<std::uint64_t>(real)), gen,
        &truth);
    const CompositionField cropped = crop_to_multiple(field, f, f);
    const CoarseFineMap map = CoarseFineMap::build(cropped.spec(), f);

    std::ostringstream setting;
    setting << "realization=" << real << ";f=" << f << ";sill=" << truth.sill;
    for (MethodTag m : {MethodTag::EE, MethodTag::EA, MethodTag::AE, MethodTag::AA}) {
      BenchRow row = run_method(m, cropped, basis, map, options.downscale);
      row.setting = setting.str();
      rows.push_back(std::move(row));
    }
    if (log) {
      *log << "realization " << real + 1 << "/" << options.realizations
           << " f=" << f << " sill=" << truth.sill << "\n";
    }
  }
  return rows;
}

SensitivityOutput bench_sensitivity(const SensitivityBenchOptions& options,
                                    std::uint64_t seed, std::ostream* log) {
  GridSpec full;
  full.ncols = options.ncols;
  full.nrows = options.nrows;
  full.cellsize_x = full.cellsize_y = options.cellsize;

  const SimplexBasis basis = SimplexBasis::standard(3, {"clay", "silt", "sand"});
  SyntheticOptions gen;
  gen.center = neutral(3);
  gen.sill = options.sill;
  gen.range = options.range;
  const CompositionField field =
      generate_synthetic_psfs(full, derive_seed(seed, 0), gen);
  const CompositionField truth = crop_to_multiple(field, options.f, options.f);
  const CoarseFineMap map = CoarseFineMap::build(truth.spec(), options.f);
  const CompositionField coarse_e = upscale_euclidean(truth, map);
  const CompositionField coarse_a = upscale_aitchison(truth, map);

  SensitivityOutput out;
  const GridSpec& fs = truth.spec();
  for (MethodTag m : {MethodTag::EE, MethodTag::EA, MethodTag::AE, MethodTag::AA}) {
    out.method_names.push_back(to_string(m));
    out.max_violation.emplace_back(fs, 0.0);
  }

  for (std::size_t fi = 0; fi < options.s2_fractions.size(); ++fi) {
    const double s2 = options.s2_fractions[fi] * options.sill;
    int mi = 0;
    for (MethodTag m : {MethodTag::EE, MethodTag::EA, MethodTag::AE, MethodTag::AA}) {
      const bool aitchison_up = m == MethodTag::AE || m == MethodTag::AA;
      const bool aitchison_down = m == MethodTag::EA || m == MethodTag::AA;
      RngStream noise(derive_seed(seed, 1000 + fi), aitchison_up ? 1 : 0);
      const CompositionField perturbed = perturb_ilr_field(
          aitchison_up ? coarse_a : coarse_e, basis, s2, noise);

      std::vector<ScalarField> parts;
      if (aitchison_down) {
        DownscaleResult res =
            ilr_atprcok(perturbed, basis, {}, map, options.downscale);
        for (std::size_t i = 0; i < res.composition->part_count(); ++i) {
          parts.push_back(res.composition->part(i));
        }
      } else {
        DownscaleResult res =
            atprcok_euclidean(perturbed, {}, map, options.downscale);
        parts = std::move(res.components);
      }
      std::ostringstream setting;
      setting << "s2_fraction=" << options.s2_fractions[fi];
      out.rows.push_back(
          summarize_prediction(parts, truth, m, setting.str()));

      ScalarField& viol = out.max_violation[static_cast<std::size_t>(mi)];
      for (int r = 0; r < fs.nrows; ++r) {
        for (int c = 0; c < fs.ncols; ++c) {
          if (truth.is_nodata(r, c)) continue;
          double sum = 0.0;
          for (const auto& p : parts) sum += p.at(r, c);
          viol.at(r, c) = std::max(viol.at(r, c), std::abs(sum - 1.0));
        }
      }
      ++mi;
    }
    if (log) {
      *log << "s2 fraction " << options.s2_fractions[fi] << " done\n";
    }
  }
  return out;
}

std::vector<BenchRow> bench_updown(const CompositionField& reference,
                                   int f_min, int f_max,
                                   const DownscaleConfig& config,
                                   std::ostream* log) {
  if (reference.part_count() < 2) {
    throw std::invalid_argument("bench_updown: need at least two parts");
  }
  const SimplexBasis basis =
      SimplexBasis::standard(reference.part_count(), reference.part_names());
  std::vector<BenchRow> rows;
  for (int f = f_min; f <= f_max; ++f) {
    const CompositionField cropped = crop_to_multiple(reference, f, f);
    if (cropped.spec().ncols < 2 * f || cropped.spec().nrows < 2 * f) {
      throw std::invalid_argument(
          "bench_updown: raster too small for factor " + std::to_string(f));
    }
    const CoarseFineMap map = CoarseFineMap::build(cropped.spec(), f);
    for (MethodTag m : {MethodTag::EE, MethodTag::EA, MethodTag::AE, MethodTag::AA}) {
      BenchRow row = run_method(m, cropped, basis, map, config);
      row.setting = "f=" + std::to_string(f);
      rows.push_back(std::move(row));
    }
    if (log) *log << "factor " << f << " done\n";
  }
  return rows;
}

}  // namespace coda
