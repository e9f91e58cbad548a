#include "coda/composition.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coda {

namespace {

constexpr double kUnitSumTol = 1e-9;
constexpr double kRecloseTol = 1e-6;

void check_positive(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw std::domain_error("composition: nonpositive part at index " +
                              std::to_string(i));
    }
  }
}

}  // namespace

Composition::Composition(std::vector<double> parts) : parts_(std::move(parts)) {
  if (parts_.size() < 2) {
    throw std::invalid_argument("composition: need at least 2 parts");
  }
  check_positive(parts_);
  double s = std::accumulate(parts_.begin(), parts_.end(), 0.0);
  if (std::abs(s - 1.0) > kRecloseTol) {
    throw std::invalid_argument("composition: parts sum to " +
                                std::to_string(s) + ", not 1");
  }
  if (std::abs(s - 1.0) > kUnitSumTol) {
    for (double& p : parts_) p /= s;
  }
}

Eigen::VectorXd Composition::as_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(parts_.data(),
                                           static_cast<long>(parts_.size()));
}

Composition closure(const std::vector<double>& raw) {
  if (raw.size() < 2) {
    throw std::invalid_argument("closure: need at least 2 parts");
  }
  check_positive(raw);
  double s = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / s;
  return Composition(std::move(out));
}

Composition closure(const Eigen::VectorXd& raw) {
  return closure(std::vector<double>(raw.data(), raw.data() + raw.size()));
}

Composition perturb(const Composition& x, const Composition& y) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument("perturb: dimension mismatch");
  }
  std::vector<double> v(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) v[i] = x[i] * y[i];
  return closure(v);
}

Composition power(double alpha, const Composition& x) {
  std::vector<double> v(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) v[i] = std::pow(x[i], alpha);
  return closure(v);
}

Composition perturb_inverse(const Composition& x, const Composition& y) {
  return perturb(x, power(-1.0, y));
}

Composition neutral(std::size_t p) {
  return Composition(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

double aitchison_inner(const Composition& x, const Composition& y) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument("aitchison_inner: dimension mismatch");
  }
  const std::size_t p = x.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      acc += std::log(x[i] / x[j]) * std::log(y[i] / y[j]);
    }
  }
  return acc / (2.0 * static_cast<double>(p));
}

double aitchison_norm(const Composition& x) {
  return std::sqrt(std::max(0.0, aitchison_inner(x, x)));
}

double aitchison_dist(const Composition& x, const Composition& y) {
  return aitchison_norm(perturb_inverse(x, y));
}

Composition boxdot(const Eigen::MatrixXd& A, const Composition& x) {
  const auto p = static_cast<long>(x.dim());
  if (A.rows() != p || A.cols() != p) {
    throw std::invalid_argument("boxdot: matrix must be p x p");
  }
  // Work in log space: log of the i-th raw part is sum_j A_ij ln x_j.
  Eigen::VectorXd logx(p);
  for (long j = 0; j < p; ++j) logx[j] = std::log(x[static_cast<size_t>(j)]);
  Eigen::VectorXd w = A * logx;
  w.array() -= w.maxCoeff();  // guard exp overflow before closure
  // saturate so extreme ratios underflow to a positive subnormal-free value
  w = w.cwiseMax(-700.0);
  return closure(Eigen::VectorXd(w.array().exp()));
}

Composition center(std::span<const Composition> xs) {
  if (xs.empty()) throw std::invalid_argument("center: empty list");
  const std::size_t p = xs.front().dim();
  std::vector<double> logmean(p, 0.0);
  for (const auto& x : xs) {
    if (x.dim() != p) throw std::invalid_argument("center: dimension mismatch");
    for (std::size_t i = 0; i < p; ++i) logmean[i] += std::log(x[i]);
  }
  std::vector<double> v(p);
  for (std::size_t i = 0; i < p; ++i) {
    v[i] = std::exp(logmean[i] / static_cast<double>(xs.size()));
  }
  return closure(v);
}

SimplexBasis::SimplexBasis(Eigen::MatrixXd V, std::vector<std::string> names)
    : V_(std::move(V)), part_names_(std::move(names)) {
  const long p = V_.cols();
  if (part_names_.empty()) {
    for (long i = 0; i < p; ++i) part_names_.push_back("part" + std::to_string(i + 1));
  }
  if (static_cast<long>(part_names_.size()) != p) {
    throw std::invalid_argument("simplex basis: part name count mismatch");
  }
  Eigen::MatrixXd G = V_ * V_.transpose();
  if (!G.isIdentity(1e-10)) {
    throw std::invalid_argument("simplex basis: rows are not orthonormal");
  }
  for (long i = 0; i < V_.rows(); ++i) {
    if (std::abs(V_.row(i).sum()) > 1e-10) {
      throw std::invalid_argument("simplex basis: row does not sum to zero");
    }
  }
}

SimplexBasis SimplexBasis::from_sbp(const std::vector<std::vector<int>>& signs,
                                    std::vector<std::string> part_names) {
  if (signs.empty()) throw std::invalid_argument("sbp: empty partition");
  const std::size_t p = signs.front().size();
  if (signs.size() != p - 1) {
    throw std::invalid_argument("sbp: need p-1 rows for p parts");
  }
  Eigen::MatrixXd V(static_cast<long>(p - 1), static_cast<long>(p));
  for (std::size_t r = 0; r < signs.size(); ++r) {
    if (signs[r].size() != p) throw std::invalid_argument("sbp: ragged rows");
    double nplus = 0, nminus = 0;
    for (int s : signs[r]) {
      if (s > 0) ++nplus;
      else if (s < 0) ++nminus;
    }
    if (nplus == 0 || nminus == 0) {
      throw std::invalid_argument("sbp: row " + std::to_string(r) +
                                  " must have both + and - parts");
    }
    const double a = std::sqrt(nminus / (nplus * (nplus + nminus)));
    const double b = -std::sqrt(nplus / (nminus * (nplus + nminus)));
    for (std::size_t c = 0; c < p; ++c) {
      V(static_cast<long>(r), static_cast<long>(c)) =
          signs[r][c] > 0 ? a : (signs[r][c] < 0 ? b : 0.0);
    }
  }
  // The constructor rejects sign matrices that do not form a valid partition
  // (rows fail orthonormality).
  return SimplexBasis(std::move(V), std::move(part_names));
}

SimplexBasis SimplexBasis::standard(std::size_t p,
                                    std::vector<std::string> part_names) {
  if (p < 2) throw std::invalid_argument("simplex basis: p must be >= 2");
  std::vector<std::vector<int>> signs(p - 1, std::vector<int>(p, 0));
  for (std::size_t r = 0; r < p - 1; ++r) {
    for (std::size_t c = 0; c <= r; ++c) signs[r][c] = 1;
    signs[r][r + 1] = -1;
  }
  return from_sbp(signs, std::move(part_names));
}

Composition SimplexBasis::basis_element(std::size_t i) const {
  if (i >= coords()) throw std::out_of_range("basis_element: index");
  Eigen::VectorXd row = V_.row(static_cast<long>(i));
  return closure(Eigen::VectorXd(row.array().exp()));
}

Eigen::VectorXd SimplexBasis::ilr(const Composition& x) const {
  if (x.dim() != parts()) {
    throw std::invalid_argument("ilr: dimension mismatch");
  }
  Eigen::VectorXd logx(static_cast<long>(x.dim()));
  for (std::size_t i = 0; i < x.dim(); ++i) {
    logx[static_cast<long>(i)] = std::log(x[i]);
  }
  // Rows of V sum to zero, so centring the log vector is unnecessary.
  return V_ * logx;
}

Composition SimplexBasis::ilr_inv(const Eigen::VectorXd& y) const {
  if (y.size() != static_cast<long>(coords())) {
    throw std::invalid_argument("ilr_inv: dimension mismatch");
  }
  Eigen::VectorXd w = V_.transpose() * y;
  w.array() -= w.maxCoeff();
  return closure(Eigen::VectorXd(w.array().exp()));
}

}  // namespace coda
