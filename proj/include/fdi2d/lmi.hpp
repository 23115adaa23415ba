#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdi2d/subspace.hpp"

namespace fdi2d {

class MalformedLmi : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SdpOptions {
  double margin_min = 1e-6;
  int max_iterations = 500;  // total Newton steps
  double tol_psd = 1e-9;
};

struct SdpResult {
  bool feasible = false;
  std::vector<Matrix> values;  // one per declared variable
  double margin = 0.0;         // -max_k lambda_max(G_k(values))
  int iterations = 0;
  std::string diagnostics;
};

// Feasibility of G_k(X) < 0 for affine symmetric-valued G_k, solved as
// min t s.t. G_k(X) <= t I with a log-barrier Newton method.
// Constraints are given as callables; their affine coefficients are
// extracted by evaluation and checked for symmetry and affinity.
class SdpProblem {
 public:
  using Function = std::function<Matrix(const std::vector<Matrix>&)>;

  int add_variable(int rows, int cols, bool symmetric);
  void add_constraint(Function g, std::string label = {});
  SdpResult solve(const SdpOptions& opt = {}) const;

 private:
  struct Variable {
    int rows, cols;
    bool symmetric;
  };
  struct Constraint {
    Function g;
    std::string label;
  };
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
};

struct LyapunovCertificate {
  std::vector<Matrix> R;
  double margin = 0.0;
};

struct LyapunovVerdict {
  bool stable = false;
  double margin = 0.0;  // -lambda_max of the tested matrix
};

// A_c = A^T (sum R_i) A - diag(R_1..R_k) with A = [A_1 ... A_k]
Matrix lyapunov_matrix(const std::vector<Matrix>& ops, const std::vector<Matrix>& r);
LyapunovVerdict lyapunov_check(const std::vector<Matrix>& ops, const std::vector<Matrix>& r,
                               double tol_psd = 1e-9);
// W_cd^T A_c W_cd with W_cd = diag(W_c, ..., W_c), W_c a basis of ker C
Matrix projected_lyapunov_matrix(const std::vector<Matrix>& ops, const Matrix& c,
                                 const std::vector<Matrix>& r);

struct FeasibilityOutcome {
  std::optional<LyapunovCertificate> certificate;
  SdpResult solver;
};

FeasibilityOutcome projected_feasibility(const std::vector<Matrix>& ops, const Matrix& c,
                                         const SdpOptions& opt = {});

// Gains Do_i such that (A_i + Do_i C) satisfy the Lyapunov inequality with cert.R.
std::vector<Matrix> recover_gains(const std::vector<Matrix>& ops, const Matrix& c,
                                  const LyapunovCertificate& cert, const SdpOptions& opt = {});

// [[-(sum R)^-1, G], [G^T, -diag(R)]] with G = [A_i + Lambda_i C]
Matrix gain_lmi_matrix(const std::vector<Matrix>& ops, const Matrix& c,
                       const std::vector<Matrix>& r, const std::vector<Matrix>& gains);

}  // namespace fdi2d
