#include "fdi2d/subspace.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace fdi2d {

namespace {

double threshold(const Matrix& a, double sigma_max, double scale, const Tolerance& tol) {
  const double dim = static_cast<double>(std::max(a.rows(), a.cols()));
  return tol.rank_rel * dim * std::max(sigma_max, scale);
}

int rank_from(const Vector& sv, double thr) {
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr && sv(i) > 0.0) ++r;
  return r;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace

Tolerance default_tolerance() {
  static const Tolerance tol = [] {
    Tolerance t;
    if (const char* env = std::getenv("FDI2D_TOL")) {
      try {
        const double v = std::stod(env);
        if (v > 0.0) t.rank_rel = v;
      } catch (const std::exception&) {
      }
    }
    return t;
  }();
  return tol;
}

void require_same_ambient(const Subspace& v, const Subspace& w, const char* what) {
  if (v.ambient_dim() != w.ambient_dim())
    throw DimensionError(std::string(what) + ": ambient dimensions " +
                         std::to_string(v.ambient_dim()) + " and " +
                         std::to_string(w.ambient_dim()) + " differ");
}

Subspace::Subspace(Matrix orthonormal_basis, Tolerance tol)
    : basis_(std::move(orthonormal_basis)), tol_(tol) {}

Subspace Subspace::zero(int n, Tolerance tol) { return Subspace(Matrix(n, 0), tol); }

Subspace Subspace::full(int n, Tolerance tol) {
  return Subspace(Matrix::Identity(n, n), tol);
}

Matrix Subspace::complement_basis() const {
  const int n = ambient_dim();
  const int want = n - dim();
  Matrix q(n, want);
  int found = 0;
  for (int i = 0; i < n && found < want; ++i) {
    Vector r = Vector::Unit(n, i);
    // two passes of classical Gram-Schmidt against S and the accepted vectors
    for (int pass = 0; pass < 2; ++pass) {
      r -= basis_ * (basis_.transpose() * r);
      r -= q.leftCols(found) * (q.leftCols(found).transpose() * r);
    }
    const double nr = r.norm();
    if (nr > 0.1) q.col(found++) = r / nr;
  }
  if (found < want) {
    Matrix rest = Matrix::Identity(n, n) - projector() -
                  q.leftCols(found) * q.leftCols(found).transpose();
    Eigen::JacobiSVD<Matrix> svd(rest, Eigen::ComputeThinU);
    q.rightCols(want - found) = svd.matrixU().leftCols(want - found);
  }
  return q;
}

Subspace Subspace::orthogonal_complement() const { return Subspace(complement_basis(), tol_); }

bool Subspace::contains_vector(const Vector& v) const {
  if (v.size() != ambient_dim()) throw DimensionError("contains_vector: size mismatch");
  const double nv = v.norm();
  if (nv == 0.0) return true;
  return (v - basis_ * (basis_.transpose() * v)).norm() <= tol_.angle * nv;
}

int numerical_rank(const Matrix& a, double scale, Tolerance tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  return rank_from(sv, threshold(a, sv(0), scale, tol));
}

Subspace image(const Matrix& a, Tolerance tol) { return image(a, 0.0, tol); }

Subspace image(const Matrix& a, double scale, Tolerance tol) {
  const int n = static_cast<int>(a.rows());
  if (a.size() == 0) return Subspace::zero(n, tol);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const int r = rank_from(sv, threshold(a, sv(0), scale, tol));
  return Subspace(svd.matrixU().leftCols(r), tol);
}

Subspace kernel(const Matrix& a, Tolerance tol) { return kernel(a, 0.0, tol); }

Subspace kernel(const Matrix& a, double scale, Tolerance tol) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() == 0) return Subspace::full(n, tol);
  if (n == 0) return Subspace::zero(0, tol);
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const int r = rank_from(sv, threshold(a, sv(0), scale, tol));
  return Subspace(svd.matrixV().rightCols(n - r), tol);
}

Subspace mapped(const Matrix& a, const Subspace& v) {
  if (a.cols() != v.ambient_dim()) throw DimensionError("mapped: operator/subspace size mismatch");
  if (v.is_zero()) return Subspace::zero(static_cast<int>(a.rows()), v.tol());
  return image(a * v.basis(), spectral_norm(a), v.tol());
}

Subspace preimage(const Matrix& a, const Subspace& v) {
  if (a.rows() != v.ambient_dim()) throw DimensionError("preimage: operator/subspace size mismatch");
  const int n = static_cast<int>(a.cols());
  if (v.is_full()) return Subspace::full(n, v.tol());
  const Matrix perp = v.complement_basis();
  return kernel(perp.transpose() * a, spectral_norm(a), v.tol());
}

Subspace sum(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "sum");
  if (v.is_zero()) return w;
  if (w.is_zero()) return v;
  Matrix stacked(v.ambient_dim(), v.dim() + w.dim());
  stacked << v.basis(), w.basis();
  return image(stacked, 1.0, v.tol());
}

Subspace intersect(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "intersect");
  if (v.is_full()) return w;
  if (w.is_full()) return v;
  if (v.is_zero() || w.is_zero()) return Subspace::zero(v.ambient_dim(), v.tol());
  const Matrix vp = v.complement_basis();
  const Matrix wp = w.complement_basis();
  Matrix stacked(vp.cols() + wp.cols(), v.ambient_dim());
  stacked << vp.transpose(), wp.transpose();
  return kernel(stacked, 1.0, v.tol());
}

Subspace complement_in(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "complement_in");
  if (!contains(v, w)) throw std::invalid_argument("complement_in: w is not contained in v");
  const int d = v.dim() - w.dim();
  if (d == 0) return Subspace::zero(v.ambient_dim(), v.tol());
  const Matrix r = v.basis() - w.basis() * (w.basis().transpose() * v.basis());
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU);
  return Subspace(svd.matrixU().leftCols(d), v.tol());
}

bool contains(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "contains");
  if (w.is_zero() || v.is_full()) return true;
  if (w.dim() > v.dim()) return false;
  const Matrix r = w.basis() - v.basis() * (v.basis().transpose() * w.basis());
  return spectral_norm(r) < v.tol().angle;
}

double largest_principal_angle_sine(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "principal angle");
  if (v.dim() != w.dim()) throw DimensionError("principal angle: dimensions differ");
  if (v.is_zero()) return 0.0;
  const Matrix r = w.basis() - v.basis() * (v.basis().transpose() * w.basis());
  return std::min(1.0, spectral_norm(r));
}

bool equals(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "equals");
  if (v.dim() != w.dim()) return false;
  return largest_principal_angle_sine(v, w) < v.tol().angle;
}

Matrix canonical_projection(const Subspace& s) { return s.complement_basis().transpose(); }

Matrix pseudo_inverse(const Matrix& a, Tolerance tol) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double thr = threshold(a, sv(0), 0.0, tol);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace fdi2d
