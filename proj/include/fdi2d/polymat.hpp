#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "fdi2d/model.hpp"

namespace fdi2d {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Real polynomial in z1, z2; coeffs(a, b) multiplies z1^a z2^b.
class BivarPoly {
 public:
  BivarPoly() : c_(Matrix::Zero(1, 1)) {}
  explicit BivarPoly(double constant) : c_(Matrix::Constant(1, 1, constant)) {}
  explicit BivarPoly(Matrix coeffs);

  static BivarPoly z1() { return monomial(1, 0); }
  static BivarPoly z2() { return monomial(0, 1); }
  static BivarPoly monomial(int a, int b, double coeff = 1.0);

  const Matrix& coeffs() const { return c_; }
  int degree_z1() const { return static_cast<int>(c_.rows()) - 1; }
  int degree_z2() const { return static_cast<int>(c_.cols()) - 1; }
  double max_abs_coeff() const { return c_.cwiseAbs().maxCoeff(); }
  bool is_zero(double tol = 0.0) const { return max_abs_coeff() <= tol; }

  Complex operator()(Complex z1, Complex z2) const;

  BivarPoly operator+(const BivarPoly& o) const;
  BivarPoly operator-(const BivarPoly& o) const;
  BivarPoly operator*(const BivarPoly& o) const;
  BivarPoly operator*(double s) const;
  BivarPoly operator-() const { return *this * -1.0; }
  bool operator==(const BivarPoly& o) const { return c_ == o.c_; }

 private:
  void trim();
  Matrix c_;
};

class BivarPolyMatrix {
 public:
  BivarPolyMatrix(int rows = 0, int cols = 0);
  // M0 + z1 M1 + z2 M2
  static BivarPolyMatrix affine(const Matrix& m0, const Matrix& m1, const Matrix& m2);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  BivarPoly& operator()(int r, int c) { return e_[r * cols_ + c]; }
  const BivarPoly& operator()(int r, int c) const { return e_[r * cols_ + c]; }
  int degree_z1() const;
  int degree_z2() const;
  double max_abs_coeff() const;

  ComplexMatrix evaluate(Complex z1, Complex z2) const;
  // Coefficient matrix of z1^a z2^b (zero beyond the degree).
  Matrix coefficient(int a, int b) const;

  BivarPolyMatrix operator+(const BivarPolyMatrix& o) const;
  BivarPolyMatrix operator-(const BivarPolyMatrix& o) const;
  BivarPolyMatrix operator*(const BivarPolyMatrix& o) const;
  BivarPolyMatrix transpose_roles() const;  // swaps z1 and z2

 private:
  int rows_, cols_;
  std::vector<BivarPoly> e_;
};

// [I - z1 A1 - z2 A2; C]
BivarPolyMatrix pbh(const FmiiModel& m);

int rank_at(const BivarPolyMatrix& p, Complex z1, Complex z2, Tolerance tol = default_tolerance());

enum class PrimeMode { zero_prime, monomic };

struct PrimenessVerdict {
  bool prime = true;  // "no witness found" when true
  std::optional<std::pair<Complex, Complex>> witness;
  int witness_rank = -1;
  int candidates_checked = 0;
};

// Sampling semi-decision: "not prime" always comes with a verified witness.
PrimenessVerdict zero_prime_check(const BivarPolyMatrix& p, PrimeMode mode, std::uint64_t seed = 1,
                                  Tolerance tol = default_tolerance());

// Exact polynomial product N * P, all coefficients below 1e-10.
bool verify_annihilator(const BivarPolyMatrix& n, const BivarPolyMatrix& p, double tol = 1e-10);

struct RankConditionVerdict {
  bool holds = true;
  int required_rank = 0;
  std::optional<std::pair<Complex, Complex>> witness;
  int witness_rank = -1;
  int points_checked = 0;
};

// rank of N(z) [z1 L1 + z2 L2; 0] over (C - {0})^2, with rank-drop roots in z1
// extracted for every sampled z2.
RankConditionVerdict isolability_rank_condition(const BivarPolyMatrix& n, const Matrix& l1, const Matrix& l2,
                                                int samples = 64, std::uint64_t seed = 1,
                                                Tolerance tol = default_tolerance());

}  // namespace fdi2d
