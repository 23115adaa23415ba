#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fdi2d {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical policy shared by every rank decision in the library.
// A singular value counts when sigma > rank_rel * max(rows, cols) * scale,
// where scale is the larger of sigma_max and the norm of the operand that
// produced the matrix (so roundoff residue of a product is not read as rank).
struct Tolerance {
  double rank_rel = 1e-10;
  double angle = 1e-8;
};

// Tolerance from FDI2D_TOL if set, otherwise the defaults.
Tolerance default_tolerance();

class Subspace {
 public:
  Subspace() = default;
  // basis must have orthonormal columns; use image() for arbitrary spanning sets.
  Subspace(Matrix orthonormal_basis, Tolerance tol);

  static Subspace zero(int n, Tolerance tol = default_tolerance());
  static Subspace full(int n, Tolerance tol = default_tolerance());

  const Matrix& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  const Tolerance& tol() const { return tol_; }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_dim(); }

  Matrix projector() const { return basis_ * basis_.transpose(); }
  // Orthonormal basis of the orthogonal complement, built by projecting
  // e_1, e_2, ... in order so that simple subspaces get readable bases.
  Matrix complement_basis() const;
  Subspace orthogonal_complement() const;

  // Distance of a vector from the subspace, relative to its norm.
  bool contains_vector(const Vector& v) const;

 private:
  Matrix basis_{0, 0};
  Tolerance tol_{};
};

int numerical_rank(const Matrix& a, double scale = 0.0, Tolerance tol = default_tolerance());

Subspace image(const Matrix& a, Tolerance tol = default_tolerance());
Subspace image(const Matrix& a, double scale, Tolerance tol);
Subspace kernel(const Matrix& a, Tolerance tol = default_tolerance());
Subspace kernel(const Matrix& a, double scale, Tolerance tol);

// A * V
Subspace mapped(const Matrix& a, const Subspace& v);
// { x : A x in V }
Subspace preimage(const Matrix& a, const Subspace& v);
Subspace sum(const Subspace& v, const Subspace& w);
Subspace intersect(const Subspace& v, const Subspace& w);
// A complement of w inside v; requires w contained in v.
Subspace complement_in(const Subspace& v, const Subspace& w);

bool contains(const Subspace& v, const Subspace& w);  // w subset of v
bool equals(const Subspace& v, const Subspace& w);
// Sine of the largest principal angle; defined for equal dimensions.
double largest_principal_angle_sine(const Subspace& v, const Subspace& w);

// Rows form an orthonormal basis of S-perp; P * P^T = I and ker P = S.
Matrix canonical_projection(const Subspace& s);

// Moore-Penrose pseudo-inverse with the shared rank policy.
Matrix pseudo_inverse(const Matrix& a, Tolerance tol = default_tolerance());

void require_same_ambient(const Subspace& v, const Subspace& w, const char* what);

}  // namespace fdi2d
