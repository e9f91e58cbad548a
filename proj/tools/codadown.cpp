// codadown: compositional raster downscaling CLI.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "coda/bench.hpp"
#include "coda/io.hpp"
#include "coda/texture.hpp"

namespace fs = std::filesystem;
using namespace coda;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
  std::string command;
  fs::path out_dir;
  std::uint64_t seed = 0;
  fs::path config_path;
  RunConfig config;
  std::vector<std::string> inputs;
  std::vector<fs::path> outputs;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void prepare() {
    fs::create_directories(out_dir);
    if (!config_path.empty()) config = RunConfig::load(config_path);
  }
  void track(const fs::path& p) { outputs.push_back(p); }

  void write_manifest() {
    RunManifest m;
    m.command = command;
    m.seed = seed;
    m.version = kVersion;
    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    m.config = config.entries();
    m.inputs = inputs;
    for (const auto& p : outputs) {
      m.output_checksums[p.generic_string()] = file_checksum(p);
    }
    m.write(out_dir / "manifest.json");
  }
};

void write_error_record(const RunContext& ctx, const std::string& message) {
  nlohmann::json err;
  err["command"] = ctx.command;
  err["error"] = message;
  std::cerr << err.dump() << "\n";
  std::error_code ec;
  if (!ctx.out_dir.empty() && fs::exists(ctx.out_dir, ec)) {
    std::ofstream f(ctx.out_dir / "error.json");
    f << err.dump(2) << "\n";
  }
}

void save_field(RunContext& ctx, const ScalarField& field,
                const std::string& stem, bool pgm = true) {
  const fs::path asc = ctx.out_dir / (stem + ".asc");
  write_ascii_grid(field, asc);
  ctx.track(asc);
  if (pgm) {
    const fs::path img = ctx.out_dir / (stem + ".pgm");
    write_pgm(field, img);
    ctx.track(img);
  }
}

void save_composition(RunContext& ctx, const CompositionField& field,
                      const std::string& stem) {
  const fs::path sidecar = ctx.out_dir / (stem + ".parts");
  write_composition(field, sidecar, ctx.out_dir);
  ctx.track(sidecar);
  for (std::size_t i = 0; i < field.part_count(); ++i) {
    ctx.track(ctx.out_dir / (field.part_names()[i] + ".asc"));
  }
}

void save_rows(RunContext& ctx, const std::vector<BenchRow>& rows,
               const std::string& stem) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const auto& row : rows) cells.push_back(bench_csv_row(row));
  const fs::path csv = ctx.out_dir / (stem + ".csv");
  write_csv(csv, bench_csv_header(), cells);
  ctx.track(csv);
}

void save_text(RunContext& ctx, const std::string& text,
               const std::string& name) {
  const fs::path p = ctx.out_dir / name;
  std::ofstream f(p);
  f << text;
  ctx.track(p);
}

GridSpec fine_from_coarse(const GridSpec& coarse, int f) {
  GridSpec fine = coarse;
  fine.ncols = coarse.ncols * f;
  fine.nrows = coarse.nrows * f;
  fine.cellsize_x = coarse.cellsize_x / f;
  fine.cellsize_y = coarse.cellsize_y / f;
  return fine;
}

std::vector<ScalarField> load_covariates(RunContext& ctx,
                                         const std::vector<std::string>& paths,
                                         std::vector<std::string>* names) {
  std::vector<ScalarField> covs;
  for (const auto& p : paths) {
    covs.push_back(read_ascii_grid(p));
    ctx.inputs.push_back(p);
    if (names) names->push_back(fs::path(p).stem().string());
  }
  return covs;
}

struct DownscaleFlags {
  int neighborhood = 25;
  std::string family = "spherical";
  bool no_deconvolution = false;

  DownscaleConfig to_config() const {
    DownscaleConfig cfg;
    cfg.kriging.neighborhood = neighborhood;
    cfg.family = variogram_family_from_string(family);
    cfg.run_deconvolution = !no_deconvolution;
    return cfg;
  }
};

void add_downscale_flags(CLI::App* cmd, DownscaleFlags& flags) {
  cmd->add_option("--neighborhood", flags.neighborhood,
                  "Coarse blocks per kriging neighborhood");
  cmd->add_option("--family", flags.family,
                  "Variogram family: spherical, exponential, gaussian");
  cmd->add_flag("--no-deconvolution", flags.no_deconvolution,
                "Krige with the coarse-support model directly");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional raster downscaling in the Aitchison simplex"};
  app.require_subcommand(1);

  RunContext ctx;
  std::string input, geometry = "aitchison", method = "AA";
  std::vector<std::string> covariate_paths;
  int factor = 2, realizations = 20, f_min = 2, f_max = 10;
  int threads = 1;
  bool replace_zeros = false, full_profile = false;
  double detection_limit = 1e-6;
  std::vector<double> s2_fractions;
  std::string model_in;
  double cellsize = 20.0;
  DownscaleFlags flags;

  auto add_common = [&](CLI::App* cmd, bool needs_seed) {
    cmd->add_option("--out", ctx.out_dir, "Run output directory")->required();
    cmd->add_option("--config", ctx.config_path, "Structured-text config file");
    cmd->add_option("--threads", threads, "Worker threads (currently 1)");
    auto* seed_opt = cmd->add_option("--seed", ctx.seed, "Master RNG seed");
    if (needs_seed) seed_opt->required();
  };
  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("--input", input, "Composition sidecar file")->required();
    cmd->add_flag("--replace-zeros", replace_zeros,
                  "Multiplicative replacement of zero parts");
    cmd->add_option("--detection-limit", detection_limit,
                    "Detection limit for zero replacement");
  };

  auto* c_ilr = app.add_subcommand("ilr", "ILR-transform a composition raster");
  add_common(c_ilr, false);
  add_input(c_ilr);

  auto* c_up = app.add_subcommand("upscale", "Block-average a composition raster");
  add_common(c_up, false);
  add_input(c_up);
  c_up->add_option("--factor", factor, "Upscaling factor per axis")->required();
  c_up->add_option("--geometry", geometry, "aitchison or euclidean");

  auto* c_down = app.add_subcommand(
      "downscale", "Area-to-point regression cokriging to a finer grid");
  add_common(c_down, false);
  add_input(c_down);
  c_down->add_option("--factor", factor, "Downscaling factor per axis")->required();
  c_down->add_option("--method", method, "EE, EA, AE or AA downscaling tag");
  c_down->add_option("--covariate", covariate_paths,
                     "Fine-scale covariate raster (repeatable)");
  add_downscale_flags(c_down, flags);

  auto* c_sim = app.add_subcommand(
      "simulate", "Block sequential Gaussian simulation of fine fields");
  add_common(c_sim, true);
  add_input(c_sim);
  c_sim->add_option("--factor", factor, "Downscaling factor per axis")->required();
  c_sim->add_option("--realizations", realizations, "Number of realizations");
  c_sim->add_option("--covariate", covariate_paths,
                    "Fine-scale covariate raster (repeatable)");
  add_downscale_flags(c_sim, flags);

  auto* c_dec = app.add_subcommand(
      "deconvolve", "Point-support model from a block-support model");
  add_common(c_dec, false);
  c_dec->add_option("--model", model_in, "Block-support model text file")->required();
  c_dec->add_option("--factor", factor, "Block size in fine cells per axis")->required();
  c_dec->add_option("--cellsize", cellsize, "Fine cell size in meters");
  c_dec->add_option("--family", flags.family, "Target family");

  auto* c_cls = app.add_subcommand(
      "classify", "USDA texture classes from a (clay, silt, sand) raster");
  add_common(c_cls, false);
  add_input(c_cls);

  auto* c_bs = app.add_subcommand(
      "bench-synthetic", "Method comparison on synthetic compositional fields");
  add_common(c_bs, true);
  c_bs->add_option("--realizations", realizations, "Number of realizations");
  c_bs->add_flag("--full", full_profile,
                 "Protocol-scale profile (hours, not minutes)");
  add_downscale_flags(c_bs, flags);

  auto* c_sens = app.add_subcommand(
      "bench-sensitivity", "Robustness to perturbed coarse data");
  add_common(c_sens, true);
  c_sens->add_option("--s2-fractions", s2_fractions,
                     "Noise variances as fractions of the sill");
  add_downscale_flags(c_sens, flags);

  auto* c_ud = app.add_subcommand(
      "bench-updown", "Upscale-downscale experiment on a supplied raster");
  add_common(c_ud, true);
  add_input(c_ud);
  c_ud->add_option("--f-min", f_min, "Smallest factor");
  c_ud->add_option("--f-max", f_max, "Largest factor");
  add_downscale_flags(c_ud, flags);

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();
  ctx.command = sub->get_name();

  try {
    ctx.prepare();

    if (sub == c_ilr) {
      ctx.inputs.push_back(input);
      const CompositionField field =
          read_composition(input, replace_zeros, detection_limit);
      const SimplexBasis basis =
          SimplexBasis::standard(field.part_count(), field.part_names());
      const GridSpec& s = field.spec();
      for (std::size_t i = 0; i < basis.coords(); ++i) {
        ScalarField coord(s, s.nodata);
        for (int r = 0; r < s.nrows; ++r) {
          for (int c = 0; c < s.ncols; ++c) {
            if (field.is_nodata(r, c)) continue;
            coord.at(r, c) = basis.ilr(field.at(r, c))[static_cast<long>(i)];
          }
        }
        save_field(ctx, coord, "ilr" + std::to_string(i + 1));
      }
    } else if (sub == c_up) {
      ctx.inputs.push_back(input);
      const CompositionField field =
          read_composition(input, replace_zeros, detection_limit);
      const CompositionField cropped = crop_to_multiple(field, factor, factor);
      const CoarseFineMap map = CoarseFineMap::build(cropped.spec(), factor);
      const CompositionField up = geometry == "euclidean"
                                      ? upscale_euclidean(cropped, map)
                                      : upscale_aitchison(cropped, map);
      save_composition(ctx, up, "upscaled");
    } else if (sub == c_down) {
      ctx.inputs.push_back(input);
      const CompositionField coarse =
          read_composition(input, replace_zeros, detection_limit);
      const GridSpec fine = fine_from_coarse(coarse.spec(), factor);
      const CoarseFineMap map = CoarseFineMap::build(fine, factor);
      const auto covs = load_covariates(ctx, covariate_paths, nullptr);
      const DownscaleConfig cfg = flags.to_config();
      const MethodTag tag = method_tag_from_string(method);
      DownscaleResult res;
      if (tag == MethodTag::EE || tag == MethodTag::AE) {
        res = atprcok_euclidean(coarse, covs, map, cfg);
      } else {
        const SimplexBasis basis =
            SimplexBasis::standard(coarse.part_count(), coarse.part_names());
        res = ilr_atprcok(coarse, basis, covs, map, cfg);
      }
      if (res.composition) {
        save_composition(ctx, *res.composition, "downscaled");
        for (std::size_t i = 0; i < res.composition->part_count(); ++i) {
          const fs::path img =
              ctx.out_dir / (res.composition->part_names()[i] + ".pgm");
          write_pgm(res.composition->part(i), img);
          ctx.track(img);
        }
      } else {
        for (std::size_t i = 0; i < res.components.size(); ++i) {
          save_field(ctx, res.components[i], res.component_names[i]);
        }
      }
      for (std::size_t i = 0; i < res.variances.size(); ++i) {
        save_field(ctx, res.variances[i],
                   "variance_" + res.component_names[i], false);
      }
      save_text(ctx, res.trend.to_text(), "trend.txt");
      for (std::size_t i = 0; i < res.point_models.size(); ++i) {
        save_text(ctx, res.point_models[i].to_text(),
                  "point_model_" + res.component_names[i] + ".txt");
      }
    } else if (sub == c_sim) {
      ctx.inputs.push_back(input);
      const CompositionField coarse =
          read_composition(input, replace_zeros, detection_limit);
      const GridSpec fine = fine_from_coarse(coarse.spec(), factor);
      const CoarseFineMap map = CoarseFineMap::build(fine, factor);
      const auto covs = load_covariates(ctx, covariate_paths, nullptr);
      const DownscaleConfig cfg = flags.to_config();
      const SimplexBasis basis =
          SimplexBasis::standard(coarse.part_count(), coarse.part_names());
      DownscaleResult det = ilr_atprcok(coarse, basis, covs, map, cfg);
      BsgsConfig bcfg;
      bcfg.kriging = cfg.kriging;
      SimulationEnsemble ens = bsgs(coarse, basis, covs, det.point_models, map,
                                    realizations, ctx.seed, bcfg);
      for (std::size_t r = 0; r < ens.realizations.size(); ++r) {
        save_composition(ctx, ens.realizations[r],
                         "realization_" + std::to_string(r));
      }
      save_text(ctx, ens.trend.to_text(), "trend.txt");
      for (std::size_t i = 0; i < ens.models.size(); ++i) {
        save_text(ctx, ens.models[i].to_text(),
                  "point_model_ilr" + std::to_string(i + 1) + ".txt");
      }
    } else if (sub == c_dec) {
      ctx.inputs.push_back(model_in);
      std::ifstream mf(model_in);
      if (!mf) throw std::runtime_error("cannot open model file " + model_in);
      std::string text((std::istreambuf_iterator<char>(mf)),
                       std::istreambuf_iterator<char>());
      const VariogramModel block_model = VariogramModel::from_text(text);
      GridSpec fine;
      fine.ncols = fine.nrows = 40 * factor;
      fine.cellsize_x = fine.cellsize_y = cellsize;
      const CoarseFineMap map = CoarseFineMap::build(fine, factor);
      DeconvolutionReport report;
      const VariogramModel point = deconvolve(
          block_model, map, variogram_family_from_string(flags.family), &report);
      save_text(ctx, point.to_text(), "point_model.txt");
      ctx.config.set("deconvolve.iterations", std::to_string(report.iterations));
      ctx.config.set("deconvolve.rel_diff", std::to_string(report.rel_diff));
      ctx.config.set("deconvolve.converged", report.converged ? "1" : "0");
    } else if (sub == c_cls) {
      ctx.inputs.push_back(input);
      const CompositionField field =
          read_composition(input, replace_zeros, detection_limit);
      const TextureRaster tex = classify_field(field);
      save_field(ctx, tex.classes, "classes");
      std::string legend;
      std::vector<std::vector<std::string>> freq_rows;
      for (int i = 0; i < kTextureClassCount; ++i) {
        const auto t = static_cast<TextureClass>(i);
        legend += std::to_string(i) + " " + to_string(t) + "\n";
        freq_rows.push_back({std::to_string(i), to_string(t),
                             std::to_string(tex.frequency[static_cast<std::size_t>(i)])});
      }
      save_text(ctx, legend, "legend.txt");
      const fs::path freq = ctx.out_dir / "frequency.csv";
      write_csv(freq, {"code", "class", "pixels"}, freq_rows);
      ctx.track(freq);
    } else if (sub == c_bs) {
      SyntheticBenchOptions opt;
      opt.realizations = realizations;
      opt.downscale = flags.to_config();
      if (full_profile) opt.apply_full_profile();
      const auto rows = bench_synthetic(opt, ctx.seed, &std::cout);
      save_rows(ctx, rows, "report");
    } else if (sub == c_sens) {
      SensitivityBenchOptions opt;
      if (!s2_fractions.empty()) opt.s2_fractions = s2_fractions;
      opt.downscale = flags.to_config();
      const SensitivityOutput out = bench_sensitivity(opt, ctx.seed, &std::cout);
      save_rows(ctx, out.rows, "report");
      for (std::size_t i = 0; i < out.max_violation.size(); ++i) {
        save_field(ctx, out.max_violation[i],
                   "max_violation_" + out.method_names[i]);
      }
    } else if (sub == c_ud) {
      ctx.inputs.push_back(input);
      const CompositionField field =
          read_composition(input, replace_zeros, detection_limit);
      const auto rows =
          bench_updown(field, f_min, f_max, flags.to_config(), &std::cout);
      save_rows(ctx, rows, "report");
    }

    ctx.write_manifest();
  } catch (const std::exception& e) {
    write_error_record(ctx, e.what());
    return 1;
  }
  return 0;
}
