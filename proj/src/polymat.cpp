#include "fdi2d/polymat.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fdi2d {

BivarPoly::BivarPoly(Matrix coeffs) : c_(std::move(coeffs)) {
  if (c_.size() == 0) c_ = Matrix::Zero(1, 1);
  trim();
}

BivarPoly BivarPoly::monomial(int a, int b, double coeff) {
  Matrix c = Matrix::Zero(a + 1, b + 1);
  c(a, b) = coeff;
  return BivarPoly(c);
}

void BivarPoly::trim() {
  Eigen::Index r = c_.rows(), c = c_.cols();
  while (r > 1 && c_.row(r - 1).isZero(0.0)) --r;
  while (c > 1 && c_.col(c - 1).head(r).isZero(0.0)) --c;
  if (r != c_.rows() || c != c_.cols()) c_ = Matrix(c_.topLeftCorner(r, c));
}

Complex BivarPoly::operator()(Complex z1, Complex z2) const {
  // Horner in z1 over Horner in z2
  Complex acc = 0.0;
  for (Eigen::Index a = c_.rows() - 1; a >= 0; --a) {
    Complex row = 0.0;
    for (Eigen::Index b = c_.cols() - 1; b >= 0; --b) row = row * z2 + c_(a, b);
    acc = acc * z1 + row;
  }
  return acc;
}

BivarPoly BivarPoly::operator+(const BivarPoly& o) const {
  Matrix c = Matrix::Zero(std::max(c_.rows(), o.c_.rows()), std::max(c_.cols(), o.c_.cols()));
  c.topLeftCorner(c_.rows(), c_.cols()) += c_;
  c.topLeftCorner(o.c_.rows(), o.c_.cols()) += o.c_;
  return BivarPoly(c);
}

BivarPoly BivarPoly::operator-(const BivarPoly& o) const { return *this + (-o); }

BivarPoly BivarPoly::operator*(const BivarPoly& o) const {
  Matrix c = Matrix::Zero(c_.rows() + o.c_.rows() - 1, c_.cols() + o.c_.cols() - 1);
  for (Eigen::Index a = 0; a < c_.rows(); ++a)
    for (Eigen::Index b = 0; b < c_.cols(); ++b) {
      if (c_(a, b) == 0.0) continue;
      c.block(a, b, o.c_.rows(), o.c_.cols()) += c_(a, b) * o.c_;
    }
  return BivarPoly(c);
}

BivarPoly BivarPoly::operator*(double s) const { return BivarPoly(Matrix(c_ * s)); }

BivarPolyMatrix::BivarPolyMatrix(int rows, int cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

BivarPolyMatrix BivarPolyMatrix::affine(const Matrix& m0, const Matrix& m1, const Matrix& m2) {
  if (m1.rows() != m0.rows() || m2.rows() != m0.rows() || m1.cols() != m0.cols() || m2.cols() != m0.cols())
    throw DimensionError("affine polynomial matrix: coefficient shapes differ");
  BivarPolyMatrix p(static_cast<int>(m0.rows()), static_cast<int>(m0.cols()));
  for (int r = 0; r < p.rows_; ++r)
    for (int c = 0; c < p.cols_; ++c) {
      Matrix t = Matrix::Zero(2, 2);
      t(0, 0) = m0(r, c);
      t(1, 0) = m1(r, c);
      t(0, 1) = m2(r, c);
      p(r, c) = BivarPoly(t);
    }
  return p;
}

int BivarPolyMatrix::degree_z1() const {
  int d = 0;
  for (const auto& e : e_) d = std::max(d, e.degree_z1());
  return d;
}

int BivarPolyMatrix::degree_z2() const {
  int d = 0;
  for (const auto& e : e_) d = std::max(d, e.degree_z2());
  return d;
}

double BivarPolyMatrix::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& e : e_) m = std::max(m, e.max_abs_coeff());
  return m;
}

ComplexMatrix BivarPolyMatrix::evaluate(Complex z1, Complex z2) const {
  ComplexMatrix out(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c)(z1, z2);
  return out;
}

Matrix BivarPolyMatrix::coefficient(int a, int b) const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) {
      const Matrix& t = (*this)(r, c).coeffs();
      if (a < t.rows() && b < t.cols()) out(r, c) = t(a, b);
    }
  return out;
}

BivarPolyMatrix BivarPolyMatrix::operator+(const BivarPolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("polynomial matrix sum: shapes differ");
  BivarPolyMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i] + o.e_[i];
  return out;
}

BivarPolyMatrix BivarPolyMatrix::operator-(const BivarPolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("polynomial matrix difference: shapes differ");
  BivarPolyMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i] - o.e_[i];
  return out;
}

BivarPolyMatrix BivarPolyMatrix::operator*(const BivarPolyMatrix& o) const {
  if (cols_ != o.rows_) throw DimensionError("polynomial matrix product: inner dimensions differ");
  BivarPolyMatrix out(rows_, o.cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < o.cols_; ++c) {
      BivarPoly acc;
      for (int k = 0; k < cols_; ++k) acc = acc + (*this)(r, k) * o(k, c);
      out(r, c) = acc;
    }
  return out;
}

BivarPolyMatrix BivarPolyMatrix::transpose_roles() const {
  BivarPolyMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = BivarPoly(Matrix(e_[i].coeffs().transpose()));
  return out;
}

BivarPolyMatrix pbh(const FmiiModel& m) {
  require_valid(m);
  if (m.order() != 2) throw std::invalid_argument("pbh: needs exactly two shift operators");
  const int n = m.state_dim();
  const int q = m.output_dim();
  Matrix m0(n + q, n), m1 = Matrix::Zero(n + q, n), m2 = Matrix::Zero(n + q, n);
  m0 << Matrix::Identity(n, n), m.output_map;
  m1.topRows(n) = -m.shift_ops[0];
  m2.topRows(n) = -m.shift_ops[1];
  return BivarPolyMatrix::affine(m0, m1, m2);
}

namespace {

int complex_rank(const ComplexMatrix& a, const Tolerance& tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const auto& sv = svd.singularValues();
  const double thr = tol.rank_rel * static_cast<double>(std::max(a.rows(), a.cols())) * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr && sv(i) > 0.0) ++r;
  return r;
}

ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(g(rng), g(rng));
  return m;
}

// Radii {0.25, 0.5, 1, 2, 4} x `per_circle` points, then `random_count`
// log-uniform draws; 0 goes first when requested.
std::vector<Complex> sampling_set(bool include_zero, int per_circle, int random_count, std::mt19937_64& rng) {
  std::vector<Complex> pts;
  if (include_zero) pts.emplace_back(0.0, 0.0);
  for (double radius : {0.25, 0.5, 1.0, 2.0, 4.0})
    for (int k = 0; k < per_circle; ++k)
      pts.push_back(std::polar(radius, 2.0 * std::numbers::pi * k / per_circle));
  std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < random_count; ++k) pts.push_back(std::polar(std::exp(logr(rng)), ang(rng)));
  return pts;
}

// Finite z with rank(X + z Y) < rank of the pencil, via a random square compression
// and a random shift so that z = 0 roots are found too.
std::vector<Complex> pencil_roots(const ComplexMatrix& x, const ComplexMatrix& y, const ComplexMatrix& omega,
                                  Complex shift) {
  const ComplexMatrix xs = omega * (x + shift * y);
  const ComplexMatrix ys = omega * y;
  Eigen::PartialPivLU<ComplexMatrix> lu(xs);
  const ComplexMatrix t = lu.solve(ys);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(t, false);
  std::vector<Complex> roots;
  const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex mu = es.eigenvalues()(i);
    if (std::abs(mu) <= 1e-12 * scale) continue;  // root at infinity
    const Complex z = shift - 1.0 / mu;
    if (std::isfinite(z.real()) && std::isfinite(z.imag())) roots.push_back(z);
  }
  return roots;
}

// Roots of a complex polynomial given by ascending coefficients.
std::vector<Complex> poly_roots(Eigen::VectorXcd c) {
  const double big = c.cwiseAbs().maxCoeff();
  Eigen::Index deg = c.size() - 1;
  while (deg > 0 && std::abs(c(deg)) <= 1e-10 * big) --deg;
  std::vector<Complex> roots;
  if (deg <= 0) return roots;
  ComplexMatrix comp = ComplexMatrix::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -c(i) / c(deg);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(comp, false);
  for (Eigen::Index i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

}  // namespace

int rank_at(const BivarPolyMatrix& p, Complex z1, Complex z2, Tolerance tol) {
  return complex_rank(p.evaluate(z1, z2), tol);
}

PrimenessVerdict zero_prime_check(const BivarPolyMatrix& p, PrimeMode mode, std::uint64_t seed, Tolerance tol) {
  if (p.cols() > p.rows()) throw std::invalid_argument("zero_prime_check: more columns than rows");
  const int n = p.cols();
  PrimenessVerdict v;
  std::mt19937_64 rng(seed);
  const bool zero_allowed = mode == PrimeMode::zero_prime;
  const auto samples = sampling_set(zero_allowed, 64, 200, rng);
  const ComplexMatrix omega = random_complex(n, p.rows(), rng);
  const Complex shift = std::polar(0.37, 1.1);

  auto admissible = [&](Complex a, Complex b) {
    return zero_allowed || (std::abs(a) > 1e-12 && std::abs(b) > 1e-12);
  };
  auto try_point = [&](Complex z1, Complex z2) {
    if (!admissible(z1, z2)) return false;
    ++v.candidates_checked;
    const int r = rank_at(p, z1, z2, tol);
    if (r < n) {
      v.prime = false;
      v.witness = {z1, z2};
      v.witness_rank = r;
      return true;
    }
    return false;
  };

  // pass 0 samples z2 and solves for z1; pass 1 swaps the roles
  for (int pass = 0; pass < 2; ++pass) {
    const BivarPolyMatrix q = pass == 0 ? p : p.transpose_roles();
    if (q.degree_z1() > 1) continue;
    const int d2 = q.degree_z2();
    for (const Complex w : samples) {
      ComplexMatrix x = ComplexMatrix::Zero(q.rows(), n), y = x;
      Complex wp = 1.0;
      for (int b = 0; b <= d2; ++b, wp *= w) {
        x += wp * q.coefficient(0, b).cast<Complex>();
        y += wp * q.coefficient(1, b).cast<Complex>();
      }
      auto point = [&](Complex z) { return pass == 0 ? std::pair{z, w} : std::pair{w, z}; };
      ComplexMatrix stacked(2 * q.rows(), n);
      stacked << x, y;
      if (complex_rank(stacked, tol) < n) {
        // the pencil drops rank for every z
        for (Complex z : {Complex(1.0), Complex(2.0)}) {
          const auto [a, b] = point(z);
          if (try_point(a, b)) return v;
        }
        continue;
      }
      if (zero_allowed) {
        const auto [a, b] = point(0.0);
        if (try_point(a, b)) return v;
      }
      for (const Complex z : pencil_roots(x, y, omega, shift)) {
        const auto [a, b] = point(z);
        if (try_point(a, b)) return v;
      }
    }
  }
  if (p.degree_z1() > 1 && p.degree_z2() > 1)
    throw std::invalid_argument("zero_prime_check: needs degree <= 1 in at least one variable");
  return v;
}

bool verify_annihilator(const BivarPolyMatrix& n, const BivarPolyMatrix& p, double tol) {
  if (n.cols() != p.rows()) throw DimensionError("verify_annihilator: N and P do not conform");
  return (n * p).max_abs_coeff() < tol;
}

RankConditionVerdict isolability_rank_condition(const BivarPolyMatrix& n, const Matrix& l1, const Matrix& l2,
                                                int samples, std::uint64_t seed, Tolerance tol) {
  if (l1.rows() != l2.rows() || l1.cols() != l2.cols()) throw DimensionError("rank condition: L1 and L2 differ in shape");
  if (n.cols() < l1.rows()) throw DimensionError("rank condition: N has too few columns");
  const int p = static_cast<int>(l1.cols());
  const int state = static_cast<int>(l1.rows());
  Matrix zero = Matrix::Zero(n.cols(), p);
  Matrix m1 = zero, m2 = zero;
  m1.topRows(state) = l1;
  m2.topRows(state) = l2;
  const BivarPolyMatrix t = n * BivarPolyMatrix::affine(zero, m1, m2);

  RankConditionVerdict v;
  v.required_rank = p;
  std::mt19937_64 rng(seed);
  auto check = [&](Complex z1, Complex z2) {
    ++v.points_checked;
    const int r = complex_rank(t.evaluate(z1, z2), tol);
    if (r < p) {
      v.holds = false;
      v.witness = {z1, z2};
      v.witness_rank = r;
      return true;
    }
    return false;
  };
  if (p == 0) return v;
  if (t.rows() < p) {
    v.holds = false;
    v.witness = {Complex(1.0), Complex(1.0)};
    v.witness_rank = t.rows();
    return v;
  }

  const ComplexMatrix omega = random_complex(p, t.rows(), rng);
  const int degree = p * t.degree_z1();
  const int nodes = degree + 1;
  for (const Complex z2 : sampling_set(false, samples, 200, rng)) {
    // det(Omega T(z1, z2)) is a polynomial in z1 of degree <= p * deg_z1; interpolate on roots of unity
    Eigen::VectorXcd vals(nodes);
    for (int k = 0; k < nodes; ++k) {
      const Complex z1 = std::polar(1.0, 2.0 * std::numbers::pi * k / nodes);
      vals(k) = (omega * t.evaluate(z1, z2)).determinant();
    }
    Eigen::VectorXcd coeffs(nodes);
    for (int a = 0; a < nodes; ++a) {
      Complex acc = 0.0;
      for (int k = 0; k < nodes; ++k) acc += vals(k) * std::polar(1.0, -2.0 * std::numbers::pi * a * k / nodes);
      coeffs(a) = acc / static_cast<double>(nodes);
    }
    const Complex probe = std::polar(1.3, 0.7);
    if (coeffs.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, t.max_abs_coeff())) {
      if (check(probe, z2)) return v;
      continue;
    }
    for (const Complex z1 : poly_roots(coeffs)) {
      if (std::abs(z1) <= 1e-9) continue;
      if (check(z1, z2)) return v;
    }
    if (check(probe, z2)) return v;
  }
  return v;
}

}  // namespace fdi2d
