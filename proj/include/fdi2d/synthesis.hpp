#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdi2d/invariants.hpp"
#include "fdi2d/lmi.hpp"

namespace fdi2d {

class NotIsolable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LmiInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FaultVerdict {
  std::string name;
  bool isolable = false;
  Subspace signature;  // span of the fault's own maps
  Subspace decoupled;  // sum of all other faults' signatures
  Subspace w_star;
  Subspace s_star;
  std::string reason;
};

struct IsolabilityReport {
  std::vector<FaultVerdict> faults;
  bool all_isolable() const;
};

// Fault j is isolable iff its signature is not contained in the smallest
// unobservability subspace containing every other fault signature.
IsolabilityReport isolability(const FmiiModel& m);
FaultVerdict isolability_of(const FmiiModel& m, int target);

struct QuotientSystem {
  int target = -1;
  std::string fault_name;
  Subspace s_star;
  FriendMaps friends;
  Matrix P, M, H;
  std::vector<Matrix> ops;     // A_i^p = P (A_i + D_i C) P^T
  std::vector<Matrix> inputs;  // P B_i
  std::vector<Matrix> target_signature;  // P L_target^i
  std::vector<std::vector<Matrix>> decoupled_signatures;  // P L_j^i, j != target

  int state_dim() const { return static_cast<int>(P.rows()); }
};

QuotientSystem quotient_system(const FmiiModel& m, int target);

// F_i = A_i^p + Do_i M,  K_i = P B_i,  E_i = -(P D_i + Do_i H).
// With these gains the estimation error e = P x - w_hat obeys
// e(i+1,j+1) = sum_i F_i e(shifted) + P L_target f, and r = M w_hat - H y = -M e.
DetectionFilter assemble_filter(const QuotientSystem& q, const std::vector<Matrix>& observer_gains);
DetectionFilter assemble_filter(const QuotientSystem& q);  // Do = 0

struct ErrorDynamics {
  std::vector<Matrix> F;
  std::vector<Matrix> fault_maps;  // P L_target^i
  Matrix M;
};

ErrorDynamics error_dynamics(const QuotientSystem& q, const std::vector<Matrix>& observer_gains);

enum class GainMethod { none, lmi };

struct SynthesisResult {
  QuotientSystem quotient;
  DetectionFilter filter;
  std::optional<LyapunovCertificate> certificate;
  std::string diagnostics;
};

// Table-1 pipeline for one target fault: S*, friends, quotient, and observer
// gains (zero, or recovered from a projected-LMI certificate).
SynthesisResult synthesize(const FmiiModel& m, int target, GainMethod method, const SdpOptions& opt = {});

}  // namespace fdi2d
