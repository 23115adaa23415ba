#include "fdi2d/invariants.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace fdi2d {

namespace {

// All multi-indices of length k with entries summing to `total`.
void compositions(int k, int total, MultiIndex& cur, int pos, std::vector<MultiIndex>& out) {
  if (pos == k - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int v = total; v >= 0; --v) {
    cur[pos] = v;
    compositions(k, total - v, cur, pos + 1, out);
  }
}

bool same_subspace(const Subspace& a, const Subspace& b) {
  return a.dim() == b.dim() && equals(a, b);
}

// Runs next() from `start` until two successive iterates coincide.
// Every recursion used here is monotone, so n + 1 steps always suffice.
SubspaceIteration fixed_point(const Subspace& start, int n,
                              const std::function<Subspace(const Subspace&)>& next) {
  SubspaceIteration it;
  it.iterates.push_back(start);
  for (int step = 0; step <= n + 1; ++step) {
    Subspace v = next(it.iterates.back());
    const bool done = same_subspace(v, it.iterates.back());
    if (done) {
      it.limit = it.iterates.back();
      return it;
    }
    it.iterates.push_back(std::move(v));
  }
  throw std::logic_error("subspace recursion did not settle within n + 1 steps");
}

Subspace preimage_all(const std::vector<Matrix>& ops, const Subspace& v) {
  Subspace acc = Subspace::full(v.ambient_dim(), v.tol());
  for (const auto& a : ops) acc = intersect(acc, preimage(a, v));
  return acc;
}

}  // namespace

TransitionPowers::TransitionPowers(const std::vector<Matrix>& ops, int depth)
    : depth_(depth), dim_(ops.empty() ? 0 : static_cast<int>(ops[0].rows())) {
  if (depth < 1) throw std::invalid_argument("transition_powers: depth must be >= 1");
  if (ops.empty()) throw std::invalid_argument("transition_powers: no shift operators");
  const int k = static_cast<int>(ops.size());
  zero_ = Matrix::Zero(dim_, dim_);
  for (int total = 0; total < depth; ++total) {
    std::vector<MultiIndex> level;
    MultiIndex cur(k, 0);
    compositions(k, total, cur, 0, level);
    for (const auto& alpha : level) {
      if (total == 0) {
        table_[alpha] = Matrix::Identity(dim_, dim_);
        continue;
      }
      Matrix acc = Matrix::Zero(dim_, dim_);
      for (int i = 0; i < k; ++i) {
        if (alpha[i] == 0) continue;
        MultiIndex prev = alpha;
        --prev[i];
        acc += ops[i] * table_.at(prev);
      }
      table_[alpha] = std::move(acc);
    }
  }
}

const Matrix& TransitionPowers::at(const MultiIndex& alpha) const {
  for (int v : alpha)
    if (v < 0) return zero_;
  auto it = table_.find(alpha);
  if (it == table_.end()) throw std::out_of_range("transition power outside computed depth");
  return it->second;
}

TransitionPowers transition_powers(const FmiiModel& m, int depth) {
  return TransitionPowers(m.shift_ops, depth);
}

Subspace finite_unobservable(const FmiiModel& m) {
  require_valid(m);
  const int n = m.state_dim();
  const TransitionPowers tp(m.shift_ops, std::max(n, 1));
  const int q = m.output_dim();
  Matrix stacked(q * static_cast<int>(tp.table().size()), n);
  int row = 0;
  for (const auto& [alpha, a] : tp.table()) {
    stacked.middleRows(row, q) = m.output_map * a;
    row += q;
  }
  double scale = 0.0;
  for (const auto& [alpha, a] : tp.table()) scale = std::max(scale, a.norm());
  return kernel(stacked, scale * m.output_map.norm(), m.tol);
}

SubspaceIteration invariant_unobservable_iteration(const FmiiModel& m) {
  require_valid(m);
  const Subspace ker_c = m.output_kernel();
  return fixed_point(ker_c, m.state_dim(), [&](const Subspace& v) {
    return intersect(preimage_all(m.shift_ops, v), ker_c);
  });
}

Subspace invariant_unobservable(const FmiiModel& m) { return invariant_unobservable_iteration(m).limit; }

bool is_invariant(const Subspace& v, const std::vector<Matrix>& ops) {
  for (const auto& a : ops) {
    if (a.rows() != v.ambient_dim() || a.cols() != v.ambient_dim())
      throw DimensionError("is_invariant: operator does not act on the ambient space");
    if (!contains(v, mapped(a, v))) return false;
  }
  return true;
}

bool is_conditioned_invariant(const FmiiModel& m, const Subspace& w) {
  const Subspace wk = intersect(w, m.output_kernel());
  for (const auto& a : m.shift_ops)
    if (!contains(w, mapped(a, wk))) return false;
  return true;
}

SubspaceIteration conditioned_invariant_iteration(const FmiiModel& m, const Subspace& l) {
  require_valid(m);
  if (l.ambient_dim() != m.state_dim()) throw DimensionError("conditioned invariant: L has wrong ambient dimension");
  const Subspace ker_c = m.output_kernel();
  if (l.is_full()) return {l, {l}};
  return fixed_point(l, m.state_dim(), [&](const Subspace& w) {
    const Subspace wk = intersect(w, ker_c);
    Subspace acc = l;
    for (const auto& a : m.shift_ops) acc = sum(acc, mapped(a, wk));
    return acc;
  });
}

Subspace min_conditioned_invariant(const FmiiModel& m, const Subspace& l) {
  return conditioned_invariant_iteration(m, l).limit;
}

SubspaceIteration unobservability_iteration(const FmiiModel& m, const Subspace& l) {
  const Subspace w_star = min_conditioned_invariant(m, l);
  const int n = m.state_dim();
  if (w_star.is_full()) return {w_star, {w_star}};
  const Subspace ker_c = m.output_kernel();
  return fixed_point(Subspace::full(n, m.tol), n, [&](const Subspace& z) {
    return sum(w_star, intersect(preimage_all(m.shift_ops, z), ker_c));
  });
}

Subspace min_unobservability(const FmiiModel& m, const Subspace& l) {
  return unobservability_iteration(m, l).limit;
}

FriendMaps friend_maps(const FmiiModel& m, const Subspace& w) {
  require_valid(m);
  if (w.ambient_dim() != m.state_dim()) throw DimensionError("friend_maps: W has wrong ambient dimension");
  if (!is_conditioned_invariant(m, w))
    throw std::invalid_argument("friend_maps: subspace is not conditioned invariant");
  const int n = m.state_dim();
  const int q = m.output_dim();
  FriendMaps d(m.order(), Matrix::Zero(n, q));
  const Subspace wc = complement_in(w, intersect(w, m.output_kernel()));
  if (wc.is_zero()) return d;
  const Matrix cw = m.output_map * wc.basis();
  if (numerical_rank(cw, m.output_map.norm(), m.tol) != wc.dim())
    throw std::logic_error("friend_maps: C is not injective on the complement of W in ker C");
  const Matrix cw_pinv = pseudo_inverse(cw, m.tol);
  for (int i = 0; i < m.order(); ++i) d[i] = -m.shift_ops[i] * wc.basis() * cw_pinv;
  return d;
}

std::vector<Matrix> closed_loop(const FmiiModel& m, const FriendMaps& d) {
  if (static_cast<int>(d.size()) != m.order()) throw DimensionError("closed_loop: need one friend map per shift operator");
  std::vector<Matrix> out;
  for (int i = 0; i < m.order(); ++i) out.push_back(m.shift_ops[i] + d[i] * m.output_map);
  return out;
}

MeasurementMaps measurement_maps(const FmiiModel& m, const Subspace& s) {
  require_valid(m);
  if (!is_conditioned_invariant(m, s))
    throw std::invalid_argument("measurement_maps: subspace is not conditioned invariant");
  MeasurementMaps out;
  out.P = canonical_projection(s);
  out.H = canonical_projection(mapped(m.output_map, s));
  out.M = out.H * m.output_map * out.P.transpose();
  return out;
}

}  // namespace fdi2d
