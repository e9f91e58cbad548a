#include "coda/trend.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace coda {

std::string TrendModel::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "intercept " << (intercept ? 1 : 0) << "\n";
  os << "covariates";
  for (const auto& n : covariate_names) os << " " << n;
  os << "\n";
  for (std::size_t i = 0; i < components.size(); ++i) {
    os << "component " << i + 1;
    for (long j = 0; j < components[i].beta.size(); ++j) {
      os << " " << components[i].beta[j];
    }
    os << "\n";
    os << "diagnostics " << i + 1 << " r2 " << components[i].r2 << " pearson "
       << components[i].pearson << "\n";
  }
  return os.str();
}

TrendModel TrendModel::from_text(const std::string& text) {
  TrendModel m;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "intercept") {
      int v;
      ls >> v;
      m.intercept = v != 0;
    } else if (key == "covariates") {
      std::string n;
      while (ls >> n) m.covariate_names.push_back(n);
    } else if (key == "component") {
      int idx;
      ls >> idx;
      std::vector<double> b;
      double v;
      while (ls >> v) b.push_back(v);
      TrendComponent comp;
      comp.beta = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<long>(b.size()));
      m.components.push_back(std::move(comp));
    } else if (key == "diagnostics") {
      int idx;
      std::string k1, k2;
      double r2, pe;
      ls >> idx >> k1 >> r2 >> k2 >> pe;
      if (idx >= 1 && static_cast<std::size_t>(idx) <= m.components.size()) {
        m.components[idx - 1].r2 = r2;
        m.components[idx - 1].pearson = pe;
      }
    } else {
      throw std::invalid_argument("trend model file: unknown key " + key);
    }
  }
  if (m.components.empty()) {
    throw std::invalid_argument("trend model file: no components");
  }
  return m;
}

std::vector<ScalarField> upscale_covariates(
    const std::vector<ScalarField>& fine_covariates, const CoarseFineMap& map) {
  std::vector<ScalarField> out;
  out.reserve(fine_covariates.size());
  for (const auto& f : fine_covariates) out.push_back(upscale_euclidean(f, map));
  return out;
}

namespace {

double pearson_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  const Eigen::VectorXd da = a.array() - ma, db = b.array() - mb;
  const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
  return den > 0.0 ? da.dot(db) / den : 0.0;
}

}  // namespace

TrendFit fit_ols(const std::vector<ScalarField>& responses,
                 const std::vector<ScalarField>& covariates,
                 std::vector<std::string> covariate_names, bool intercept) {
  if (responses.empty()) throw std::invalid_argument("fit_ols: no responses");
  const GridSpec& spec = responses[0].spec();
  for (const auto& r : responses) {
    if (!r.spec().same_shape(spec)) {
      throw std::invalid_argument("fit_ols: response spec mismatch");
    }
  }
  for (const auto& c : covariates) {
    if (!c.spec().same_shape(spec)) {
      throw std::invalid_argument("fit_ols: covariate spec mismatch");
    }
  }
  if (covariate_names.empty()) {
    for (std::size_t i = 0; i < covariates.size(); ++i) {
      covariate_names.push_back("cov" + std::to_string(i + 1));
    }
  }
  if (covariate_names.size() != covariates.size()) {
    throw std::invalid_argument("fit_ols: covariate name count mismatch");
  }
  if (!intercept && covariates.empty()) {
    throw std::invalid_argument("fit_ols: no covariates and no intercept");
  }

  // observation rows: pixels where every response and covariate is defined
  std::vector<std::pair<int, int>> obs;
  for (int r = 0; r < spec.nrows; ++r) {
    for (int c = 0; c < spec.ncols; ++c) {
      bool ok = true;
      for (const auto& f : responses) ok = ok && !f.is_nodata(r, c);
      for (const auto& f : covariates) ok = ok && !f.is_nodata(r, c);
      if (ok) obs.emplace_back(r, c);
    }
  }
  const long n = static_cast<long>(obs.size());
  const long L = static_cast<long>(covariates.size()) + (intercept ? 1 : 0);
  if (n <= L) {
    throw std::invalid_argument("fit_ols: need more observations than covariates");
  }

  // standardized design matrix for conditioning
  Eigen::MatrixXd X(n, L);
  Eigen::VectorXd col_mean = Eigen::VectorXd::Zero(L);
  Eigen::VectorXd col_sd = Eigen::VectorXd::Ones(L);
  long j0 = 0;
  if (intercept) {
    X.col(0).setOnes();
    j0 = 1;
  }
  for (std::size_t k = 0; k < covariates.size(); ++k) {
    const long j = j0 + static_cast<long>(k);
    for (long i = 0; i < n; ++i) {
      X(i, j) = covariates[k].at(obs[i].first, obs[i].second);
    }
    const double m = X.col(j).mean();
    const double sd = std::sqrt((X.col(j).array() - m).square().sum() /
                                static_cast<double>(n));
    col_mean[j] = intercept ? m : 0.0;
    col_sd[j] = sd > 0.0 ? sd : 1.0;
    X.col(j) = (X.col(j).array() - col_mean[j]) / col_sd[j];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < L) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (long k = qr.rank(); k < L; ++k) {
      const long j = perm[k];
      if (!names.empty()) names += ", ";
      names += (intercept && j == 0) ? "intercept"
                                     : covariate_names[j - j0];
    }
    throw std::runtime_error("fit_ols: rank-deficient design, collinear: " +
                             names);
  }

  TrendFit fit;
  fit.model.intercept = intercept;
  if (intercept) fit.model.covariate_names.push_back("intercept");
  for (const auto& nme : covariate_names) fit.model.covariate_names.push_back(nme);

  for (const auto& resp : responses) {
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) y[i] = resp.at(obs[i].first, obs[i].second);
    Eigen::VectorXd beta_std = qr.solve(y);
    Eigen::VectorXd fitted = X * beta_std;

    // coefficients back in original units
    Eigen::VectorXd beta = beta_std;
    for (long j = j0; j < L; ++j) beta[j] = beta_std[j] / col_sd[j];
    if (intercept) {
      double shift = 0.0;
      for (long j = j0; j < L; ++j) shift += beta_std[j] * col_mean[j] / col_sd[j];
      beta[0] = beta_std[0] - shift;
    }

    TrendComponent comp;
    comp.beta = beta;
    const double sst = (y.array() - y.mean()).square().sum();
    const double ssr = (y - fitted).squaredNorm();
    comp.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    comp.pearson = pearson_corr(fitted, y);
    fit.model.components.push_back(std::move(comp));

    ScalarField res(spec, spec.nodata);
    for (long i = 0; i < n; ++i) {
      res.at(obs[i].first, obs[i].second) = y[i] - fitted[i];
    }
    fit.residuals.push_back(std::move(res));
  }
  return fit;
}

std::vector<ScalarField> predict_trend(const TrendModel& model,
                                       const std::vector<ScalarField>& covariates,
                                       const GridSpec& spec) {
  const std::size_t expected =
      model.covariate_names.size() - (model.intercept ? 1 : 0);
  if (covariates.size() != expected) {
    throw std::invalid_argument("predict_trend: expected " +
                                std::to_string(expected) + " covariates, got " +
                                std::to_string(covariates.size()));
  }
  for (const auto& c : covariates) {
    if (!c.spec().same_shape(spec)) {
      throw std::invalid_argument("predict_trend: covariate spec mismatch");
    }
  }
  std::vector<ScalarField> out;
  for (const auto& comp : model.components) {
    ScalarField f(spec, spec.nodata);
    const long j0 = model.intercept ? 1 : 0;
    for (int r = 0; r < spec.nrows; ++r) {
      for (int c = 0; c < spec.ncols; ++c) {
        bool nodata = false;
        double v = model.intercept ? comp.beta[0] : 0.0;
        for (std::size_t k = 0; k < covariates.size(); ++k) {
          if (covariates[k].is_nodata(r, c)) {
            nodata = true;
            break;
          }
          v += comp.beta[j0 + static_cast<long>(k)] * covariates[k].at(r, c);
        }
        if (!nodata) f.at(r, c) = v;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace coda
