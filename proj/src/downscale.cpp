#include "coda/downscale.hpp"

#include <cmath>
#include <stdexcept>

namespace coda {

std::string to_string(MethodTag t) {
  switch (t) {
    case MethodTag::EE: return "EE";
    case MethodTag::EA: return "EA";
    case MethodTag::AE: return "AE";
    case MethodTag::AA: return "AA";
  }
  throw std::logic_error("unknown method tag");
}

MethodTag method_tag_from_string(const std::string& s) {
  if (s == "EE") return MethodTag::EE;
  if (s == "EA") return MethodTag::EA;
  if (s == "AE") return MethodTag::AE;
  if (s == "AA") return MethodTag::AA;
  throw std::invalid_argument("unknown method tag: " + s);
}

namespace {

// Shared multi-component ATPRK: OLS trend at coarse scale, per-component
// variogram estimation (or fixed models), deconvolution, residual ATPK and
// fine trend addition.
DownscaleResult multi_atprk(const std::vector<ScalarField>& coarse_components,
                            std::vector<std::string> component_names,
                            const std::vector<ScalarField>& fine_covariates,
                            const CoarseFineMap& map,
                            const DownscaleConfig& config) {
  for (const auto& f : coarse_components) {
    if (!f.spec().same_shape(map.coarse_spec())) {
      throw std::invalid_argument("downscale: component not on the coarse spec");
    }
  }
  for (const auto& f : fine_covariates) {
    if (!f.spec().same_shape(map.fine_spec())) {
      throw std::invalid_argument("downscale: covariate not on the fine spec");
    }
  }
  if (!config.fixed_models.empty() &&
      config.fixed_models.size() != coarse_components.size()) {
    throw std::invalid_argument("downscale: fixed model count mismatch");
  }

  DownscaleResult out;
  out.component_names = std::move(component_names);

  auto coarse_covs = upscale_covariates(fine_covariates, map);
  TrendFit fit = fit_ols(coarse_components, coarse_covs, {}, true);
  out.trend = fit.model;
  out.coarse_residuals = std::move(fit.residuals);
  out.fine_trend =
      predict_trend(out.trend, fine_covariates, map.fine_spec());

  for (std::size_t i = 0; i < coarse_components.size(); ++i) {
    VariogramModel point;
    DeconvolutionReport rep;
    if (!config.fixed_models.empty()) {
      point = config.fixed_models[i];
    } else {
      try {
        auto emp = empirical_variogram(out.coarse_residuals[i],
                                       config.lag_width, config.max_lag);
        if (emp.lag.size() < 3) {
          // too few coarse lags to estimate structure: fall back to a
          // heuristic model at the residual variance
          double mean = 0.0, var = 0.0;
          std::int64_t n = 0;
          for (double v : out.coarse_residuals[i].values()) {
            if (v == map.coarse_spec().nodata) continue;
            mean += v;
            ++n;
          }
          mean /= std::max<std::int64_t>(n, 1);
          for (double v : out.coarse_residuals[i].values()) {
            if (v == map.coarse_spec().nodata) continue;
            var += (v - mean) * (v - mean);
          }
          var /= std::max<std::int64_t>(n, 1);
          if (var <= 0.0) throw std::runtime_error("flat residuals");
          point = VariogramModel{config.family, 0.0, var,
                                 2.0 * map.coarse_spec().cellsize_x};
        } else {
          VariogramModel coarse_fit = fit_variogram(emp, config.family);
          point = (config.run_deconvolution && map.block_size() > 1)
                      ? deconvolve(coarse_fit, map, config.family, &rep)
                      : coarse_fit;
        }
      } catch (const std::runtime_error&) {
        // all-zero residual structure: any pure-nugget model reproduces the
        // (zero) residual field
        point = VariogramModel{config.family, 1.0, 0.0,
                               map.coarse_spec().cellsize_x};
        point.nugget = 1.0;
        point.psill = 0.0;
      }
    }
    out.point_models.push_back(point);
    out.deconvolution.push_back(rep);

    WeightsRecord rec;
    ResidualPrediction pred = predict_residual_field(
        out.coarse_residuals[i], point, map, config.kriging,
        config.keep_weights ? &rec : nullptr);
    if (config.keep_weights) out.weights.push_back(std::move(rec));

    const GridSpec& fs = map.fine_spec();
    ScalarField comp(fs, fs.nodata);
    for (int r = 0; r < fs.nrows; ++r) {
      for (int c = 0; c < fs.ncols; ++c) {
        if (pred.prediction.is_nodata(r, c) ||
            out.fine_trend[i].is_nodata(r, c)) {
          continue;
        }
        comp.at(r, c) = out.fine_trend[i].at(r, c) + pred.prediction.at(r, c);
      }
    }
    out.components.push_back(std::move(comp));
    out.variances.push_back(std::move(pred.variance));
  }
  return out;
}

}  // namespace

DownscaleResult atprk_scalar(const ScalarField& coarse,
                             const std::vector<ScalarField>& fine_covariates,
                             const CoarseFineMap& map,
                             const DownscaleConfig& config) {
  return multi_atprk({coarse}, {"z"}, fine_covariates, map, config);
}

DownscaleResult atprcok_euclidean(const CompositionField& coarse,
                                  const std::vector<ScalarField>& fine_covariates,
                                  const CoarseFineMap& map,
                                  const DownscaleConfig& config) {
  std::vector<ScalarField> parts;
  for (std::size_t i = 0; i < coarse.part_count(); ++i) {
    parts.push_back(coarse.part(i));
  }
  DownscaleResult out = multi_atprk(parts, coarse.part_names(), fine_covariates,
                                    map, config);
  out.diagnostics =
      compute_diagnostics(out.components, nullptr, &map, &coarse, false);
  return out;
}

DownscaleResult ilr_atprcok(const CompositionField& coarse,
                            const SimplexBasis& basis,
                            const std::vector<ScalarField>& fine_covariates,
                            const CoarseFineMap& map,
                            const DownscaleConfig& config) {
  if (basis.parts() != coarse.part_count()) {
    throw std::invalid_argument("ilr_atprcok: basis/part mismatch");
  }
  const GridSpec& cs = map.coarse_spec();
  const std::size_t q = basis.coords();
  std::vector<ScalarField> coords(q, ScalarField(cs, cs.nodata));
  std::vector<std::string> names;
  for (std::size_t i = 0; i < q; ++i) names.push_back("ilr" + std::to_string(i + 1));
  for (int r = 0; r < cs.nrows; ++r) {
    for (int c = 0; c < cs.ncols; ++c) {
      if (coarse.is_nodata(r, c)) continue;
      Eigen::VectorXd y = basis.ilr(coarse.at(r, c));
      for (std::size_t i = 0; i < q; ++i) {
        coords[i].at(r, c) = y[static_cast<long>(i)];
      }
    }
  }

  DownscaleResult out =
      multi_atprk(coords, std::move(names), fine_covariates, map, config);

  const GridSpec& fs = map.fine_spec();
  CompositionField comp(fs, coarse.part_count(), coarse.part_names());
  for (int r = 0; r < fs.nrows; ++r) {
    for (int c = 0; c < fs.ncols; ++c) {
      bool nodata = false;
      Eigen::VectorXd y(static_cast<long>(q));
      for (std::size_t i = 0; i < q; ++i) {
        if (out.components[i].is_nodata(r, c)) {
          nodata = true;
          break;
        }
        y[static_cast<long>(i)] = out.components[i].at(r, c);
      }
      if (nodata) {
        comp.set_nodata(r, c);
      } else {
        comp.set(r, c, basis.ilr_inv(y));
      }
    }
  }
  out.composition = std::move(comp);

  std::vector<ScalarField> pred_parts;
  for (std::size_t i = 0; i < coarse.part_count(); ++i) {
    pred_parts.push_back(out.composition->part(i));
  }
  out.diagnostics =
      compute_diagnostics(pred_parts, nullptr, &map, &coarse, true);
  return out;
}

Composition simplex_predict_pixel(const SimplexBasis& basis,
                                  const Eigen::VectorXd& trend_ilr,
                                  const std::vector<Eigen::MatrixXd>& weightsY,
                                  const std::vector<Composition>& residuals) {
  if (weightsY.size() != residuals.size()) {
    throw std::invalid_argument("simplex_predict_pixel: weight/residual mismatch");
  }
  const Eigen::MatrixXd& V = basis.contrast_matrix();
  Composition acc = basis.ilr_inv(trend_ilr);
  for (std::size_t k = 0; k < weightsY.size(); ++k) {
    if (weightsY[k].rows() != static_cast<long>(basis.coords()) ||
        weightsY[k].cols() != static_cast<long>(basis.coords())) {
      throw std::invalid_argument("simplex_predict_pixel: weight matrix size");
    }
    Eigen::MatrixXd lifted = V.transpose() * weightsY[k] * V;
    acc = perturb(acc, boxdot(lifted, residuals[k]));
  }
  return acc;
}

CompositionField simplex_predictor(const DownscaleResult& result,
                                   const SimplexBasis& basis,
                                   const CoarseFineMap& map) {
  const std::size_t q = basis.coords();
  if (result.weights.size() != q || result.coarse_residuals.size() != q) {
    throw std::invalid_argument(
        "simplex_predictor: run ilr_atprcok with keep_weights first");
  }
  const GridSpec& cs = map.coarse_spec();
  const GridSpec& fs = map.fine_spec();

  // residual compositions at the blocks: ilr_inv of the residual coordinates
  std::vector<std::optional<Composition>> resid_comp(cs.size());
  for (int r = 0; r < cs.nrows; ++r) {
    for (int c = 0; c < cs.ncols; ++c) {
      if (result.coarse_residuals[0].is_nodata(r, c)) continue;
      Eigen::VectorXd e(static_cast<long>(q));
      for (std::size_t i = 0; i < q; ++i) {
        e[static_cast<long>(i)] = result.coarse_residuals[i].at(r, c);
      }
      resid_comp[static_cast<std::size_t>(r) * cs.ncols + c] = basis.ilr_inv(e);
    }
  }

  CompositionField out(fs, basis.parts(), basis.part_names());
  for (int r = 0; r < fs.nrows; ++r) {
    for (int c = 0; c < fs.ncols; ++c) {
      const std::size_t idx =
          static_cast<std::size_t>(r) * fs.ncols + static_cast<std::size_t>(c);
      const auto& nb = result.weights[0].neighbors[idx];
      if (nb.empty() || result.fine_trend[0].is_nodata(r, c)) {
        out.set_nodata(r, c);
        continue;
      }
      Eigen::VectorXd trend(static_cast<long>(q));
      for (std::size_t i = 0; i < q; ++i) {
        trend[static_cast<long>(i)] = result.fine_trend[i].at(r, c);
      }
      // per-coordinate runs share the neighborhood; the joint weight matrix
      // is diagonal (uncorrelated ILR components)
      std::vector<Eigen::MatrixXd> lam;
      std::vector<Composition> res;
      for (std::size_t k = 0; k < nb.size(); ++k) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<long>(q),
                                                  static_cast<long>(q));
        for (std::size_t i = 0; i < q; ++i) {
          d(static_cast<long>(i), static_cast<long>(i)) =
              result.weights[i].weights[idx][k];
        }
        lam.push_back(std::move(d));
        res.push_back(*resid_comp[static_cast<std::size_t>(nb[k].first) *
                                      cs.ncols +
                                  nb[k].second]);
      }
      out.set(r, c, simplex_predict_pixel(basis, trend, lam, res));
    }
  }
  return out;
}

Diagnostics compute_diagnostics(const std::vector<ScalarField>& parts_pred,
                                const CompositionField* reference,
                                const CoarseFineMap* map,
                                const CompositionField* coarse,
                                bool aitchison_blocks) {
  if (parts_pred.empty()) {
    throw std::invalid_argument("diagnostics: no predicted parts");
  }
  const GridSpec& fs = parts_pred[0].spec();
  for (const auto& p : parts_pred) {
    if (!p.spec().same_shape(fs)) {
      throw std::invalid_argument("diagnostics: misaligned part layers");
    }
  }
  if (reference && !reference->spec().same_shape(fs)) {
    throw std::invalid_argument("diagnostics: reference spec mismatch");
  }

  Diagnostics d;
  d.sum_dev_map = ScalarField(fs, fs.nodata);
  if (reference) d.error_map = ScalarField(fs, fs.nodata);
  double err_sum = 0.0;
  for (int r = 0; r < fs.nrows; ++r) {
    for (int c = 0; c < fs.ncols; ++c) {
      if (parts_pred[0].is_nodata(r, c)) continue;
      double sum = 0.0;
      bool negative = false;
      for (const auto& p : parts_pred) {
        const double v = p.at(r, c);
        sum += v;
        if (v <= 0.0) negative = true;
      }
      if (negative) ++d.negative_part_pixels;
      const double dev = std::abs(sum - 1.0);
      d.sum_dev_map->at(r, c) = dev;
      d.max_sum_dev = std::max(d.max_sum_dev, dev);
      ++d.compared_pixels;
      if (reference && !reference->is_nodata(r, c)) {
        double e2 = 0.0;
        for (std::size_t i = 0; i < parts_pred.size(); ++i) {
          const double diff =
              parts_pred[i].at(r, c) - reference->part(i).at(r, c);
          e2 += diff * diff;
        }
        const double e = std::sqrt(e2);
        d.error_map->at(r, c) = e;
        err_sum += e;
        d.max_error = std::max(d.max_error, e);
      }
    }
  }
  if (reference && d.compared_pixels > 0) {
    d.mean_error = err_sum / static_cast<double>(d.compared_pixels);
  }

  if (map && coarse) {
    // re-upscale the prediction and compare to the coarse input per block
    const GridSpec& cs = map->coarse_spec();
    for (int br = 0; br < cs.nrows; ++br) {
      for (int bc = 0; bc < cs.ncols; ++bc) {
        if (coarse->is_nodata(br, bc)) continue;
        bool usable = true;
        double dev = 0.0;
        if (aitchison_blocks) {
          std::vector<Composition> block;
          for (auto [r, c] : map->fine_pixels_of(br, bc)) {
            if (parts_pred[0].is_nodata(r, c)) {
              usable = false;
              break;
            }
            std::vector<double> v(parts_pred.size());
            bool pos = true;
            for (std::size_t i = 0; i < parts_pred.size(); ++i) {
              v[i] = parts_pred[i].at(r, c);
              pos = pos && v[i] > 0.0;
            }
            if (!pos) {
              usable = false;
              break;
            }
            block.push_back(closure(v));
          }
          if (usable && !block.empty()) {
            const Composition up = center(block);
            const Composition ref = coarse->at(br, bc);
            dev = aitchison_dist(up, ref) / (1.0 + aitchison_norm(ref));
          }
        } else {
          std::vector<double> up(parts_pred.size(), 0.0), ref(parts_pred.size());
          int n = 0;
          for (auto [r, c] : map->fine_pixels_of(br, bc)) {
            if (parts_pred[0].is_nodata(r, c)) {
              usable = false;
              break;
            }
            for (std::size_t i = 0; i < parts_pred.size(); ++i) {
              up[i] += parts_pred[i].at(r, c);
            }
            ++n;
          }
          if (usable && n > 0) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < parts_pred.size(); ++i) {
              up[i] /= n;
              ref[i] = coarse->part(i).at(br, bc);
              num += (up[i] - ref[i]) * (up[i] - ref[i]);
              den += ref[i] * ref[i];
            }
            dev = std::sqrt(num) / (1.0 + std::sqrt(den));
          }
        }
        if (usable) d.max_block_dev = std::max(d.max_block_dev, dev);
      }
    }
  }
  return d;
}

}  // namespace coda
