#pragma once

#include <map>
#include <vector>

#include "fdi2d/model.hpp"

namespace fdi2d {

using MultiIndex = std::vector<int>;

// A^(alpha) for every multi-index with |alpha| < depth, where
// A^(0) = I and A^(alpha) = sum_i A_i A^(alpha - e_i).
class TransitionPowers {
 public:
  TransitionPowers(const std::vector<Matrix>& ops, int depth);

  const Matrix& at(const MultiIndex& alpha) const;
  const Matrix& at(int i, int j) const { return at(MultiIndex{i, j}); }
  int depth() const { return depth_; }
  const std::map<MultiIndex, Matrix>& table() const { return table_; }

 private:
  int depth_;
  int dim_;
  Matrix zero_;
  std::map<MultiIndex, Matrix> table_;
};

TransitionPowers transition_powers(const FmiiModel& m, int depth);

using FriendMaps = std::vector<Matrix>;

// Iterates of a subspace recursion, first entry is the initial subspace.
struct SubspaceIteration {
  Subspace limit;
  std::vector<Subspace> iterates;
  int steps() const { return static_cast<int>(iterates.size()) - 1; }
};

// intersection of ker C A^(alpha) over |alpha| < n
Subspace finite_unobservable(const FmiiModel& m);
// largest A-invariant subspace inside ker C
SubspaceIteration invariant_unobservable_iteration(const FmiiModel& m);
Subspace invariant_unobservable(const FmiiModel& m);

bool is_invariant(const Subspace& v, const std::vector<Matrix>& ops);

// A_i (W intersect ker C) contained in W for every i
bool is_conditioned_invariant(const FmiiModel& m, const Subspace& w);

SubspaceIteration conditioned_invariant_iteration(const FmiiModel& m, const Subspace& l);
Subspace min_conditioned_invariant(const FmiiModel& m, const Subspace& l);

SubspaceIteration unobservability_iteration(const FmiiModel& m, const Subspace& l);
Subspace min_unobservability(const FmiiModel& m, const Subspace& l);

// D_i with (A_i + D_i C) W contained in W; sends the part of W outside ker C to zero.
FriendMaps friend_maps(const FmiiModel& m, const Subspace& w);

std::vector<Matrix> closed_loop(const FmiiModel& m, const FriendMaps& d);

struct MeasurementMaps {
  Matrix H;  // orthonormal rows spanning (C S)-perp
  Matrix M;  // M P = H C
  Matrix P;  // canonical projection with kernel S
};

MeasurementMaps measurement_maps(const FmiiModel& m, const Subspace& s);

}  // namespace fdi2d
