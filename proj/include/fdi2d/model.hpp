#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fdi2d/subspace.hpp"

namespace fdi2d {

// One fault channel: maps[i] is the signature entering through shift slot i.
struct FaultSignature {
  std::string name;
  std::vector<Matrix> maps;
};

// x(i+1,j+1) = A1 x(i,j+1) + A2 x(i+1,j) + B1 u(i,j+1) + B2 u(i+1,j)
//            + sum_k L_k^1 f_k(i,j+1) + L_k^2 f_k(i+1,j),   y = C x
// The number of shift operators k is a runtime property (1, 2 or 3).
struct FmiiModel {
  std::vector<Matrix> shift_ops;
  std::vector<Matrix> input_maps;
  Matrix output_map;
  std::vector<FaultSignature> faults;
  Tolerance tol = default_tolerance();

  int order() const { return static_cast<int>(shift_ops.size()); }
  int state_dim() const { return shift_ops.empty() ? 0 : static_cast<int>(shift_ops[0].rows()); }
  int input_dim() const { return input_maps.empty() ? 0 : static_cast<int>(input_maps[0].cols()); }
  int output_dim() const { return static_cast<int>(output_map.rows()); }
  int fault_count() const { return static_cast<int>(faults.size()); }

  // Index of the fault with this name, or -1.
  int fault_index(const std::string& name) const;
  // span of [L_j^1 ... L_j^k]
  Subspace fault_subspace(int j) const;
  // sum of the fault subspaces of every fault except `skip`
  Subspace other_faults_subspace(int skip) const;
  Subspace output_kernel() const { return kernel(output_map, tol); }
};

// Throws std::invalid_argument with the joined diagnostics if the model is malformed.
void require_valid(const FmiiModel& m);
std::vector<std::string> validate(const FmiiModel& m);

struct DetectionFilter {
  std::string fault;
  std::vector<Matrix> F, K, E;
  Matrix M, H;
  // Construction data carried for export; empty when unknown.
  Matrix P;
  std::vector<Matrix> D, Do, R;

  int state_dim() const { return static_cast<int>(M.cols()); }
  int residual_dim() const { return static_cast<int>(M.rows()); }
};

std::vector<std::string> validate(const DetectionFilter& f, const FmiiModel& m);

struct RoesserFault {
  std::string name;
  Matrix signature;  // (r+s) x width, split into horizontal and vertical rows
};

// r(i+1,j) = A11 r + A12 s + B11 u,  s(i,j+1) = A21 r + A22 s + B21 u,  y = C [r; s]
struct RoesserModel {
  Matrix a11, a12, a21, a22;
  Matrix b11, b21;
  Matrix c;
  std::vector<RoesserFault> faults;
};

FmiiModel roesser_to_fmii(const RoesserModel& r);

}  // namespace fdi2d
