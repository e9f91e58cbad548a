#pragma once

// Aitchison-geometry kernel: compositions, simplex vector-space operations,
// ILR isometry and matrix-by-composition products.

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace coda {

/// A strictly positive unit-sum vector of parts (a point of the open simplex).
/// Inputs whose sum deviates from 1 by at most 1e-6 are re-closed silently;
/// larger deviations and nonpositive parts are rejected.
class Composition {
 public:
  explicit Composition(std::vector<double> parts);

  std::size_t dim() const { return parts_.size(); }
  const std::vector<double>& parts() const { return parts_; }
  double operator[](std::size_t i) const { return parts_[i]; }

  Eigen::VectorXd as_vector() const;

 private:
  std::vector<double> parts_;
};

/// Normalize a positive vector to unit sum.
Composition closure(const std::vector<double>& raw);
Composition closure(const Eigen::VectorXd& raw);

/// Perturbation x (+) y: closure of the element-wise product.
Composition perturb(const Composition& x, const Composition& y);

/// Powering alpha (.) x: closure of element-wise alpha-th powers.
Composition power(double alpha, const Composition& x);

/// x (-) y = x (+) ((-1) (.) y).
Composition perturb_inverse(const Composition& x, const Composition& y);

/// Neutral element (1/p, ..., 1/p).
Composition neutral(std::size_t p);

double aitchison_inner(const Composition& x, const Composition& y);
double aitchison_norm(const Composition& x);
double aitchison_dist(const Composition& x, const Composition& y);

/// Matrix-by-composition product A [.] x: closure of
/// [prod_j x_j^{A_1j}, ..., prod_j x_j^{A_pj}].
Composition boxdot(const Eigen::MatrixXd& A, const Composition& x);

/// Closed part-wise geometric mean.
Composition center(std::span<const Composition> xs);

/// Orthonormal simplex basis represented by its (p-1) x p contrast matrix.
/// Rows sum to zero and are mutually orthonormal.
class SimplexBasis {
 public:
  /// Build from a sequential binary partition given as (p-1) sign rows over
  /// the p parts: +1 parts go to the numerator group, -1 to the denominator
  /// group, 0 excluded. Throws if the rows do not define an orthonormal
  /// contrast system.
  static SimplexBasis from_sbp(const std::vector<std::vector<int>>& signs,
                               std::vector<std::string> part_names = {});

  /// Pivot-style default: row i contrasts parts {0..i} against part i+1.
  /// For p = 3 this gives y1 = (1/sqrt(2)) ln(z1/z2) and
  /// y2 = sqrt(2/3) ln(sqrt(z1 z2)/z3).
  static SimplexBasis standard(std::size_t p,
                               std::vector<std::string> part_names = {});

  std::size_t parts() const { return static_cast<std::size_t>(V_.cols()); }
  std::size_t coords() const { return static_cast<std::size_t>(V_.rows()); }
  const Eigen::MatrixXd& contrast_matrix() const { return V_; }
  const std::vector<std::string>& part_names() const { return part_names_; }

  /// i-th basis composition psi_i = C(exp(V.row(i))).
  Composition basis_element(std::size_t i) const;

  Eigen::VectorXd ilr(const Composition& x) const;
  Composition ilr_inv(const Eigen::VectorXd& y) const;

 private:
  SimplexBasis(Eigen::MatrixXd V, std::vector<std::string> names);

  Eigen::MatrixXd V_;
  std::vector<std::string> part_names_;
};

}  // namespace coda
