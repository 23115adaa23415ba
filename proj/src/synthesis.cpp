#include "fdi2d/synthesis.hpp"

#include <Eigen/SVD>

namespace fdi2d {

bool IsolabilityReport::all_isolable() const {
  for (const auto& f : faults)
    if (!f.isolable) return false;
  return !faults.empty();
}

FaultVerdict isolability_of(const FmiiModel& m, int target) {
  require_valid(m);
  if (target < 0 || target >= m.fault_count()) throw std::out_of_range("isolability: fault index out of range");
  FaultVerdict v;
  v.name = m.faults[target].name;
  v.signature = m.fault_subspace(target);
  v.decoupled = m.other_faults_subspace(target);
  v.w_star = min_conditioned_invariant(m, v.decoupled);
  v.s_star = min_unobservability(m, v.decoupled);
  v.isolable = !v.signature.is_zero() && !contains(v.s_star, v.signature);
  if (v.signature.is_zero())
    v.reason = "signature is zero";
  else if (!v.isolable)
    v.reason = "signature lies inside S* (dim " + std::to_string(v.s_star.dim()) +
               ") generated by the other faults";
  else
    v.reason = "signature not contained in S* (dim " + std::to_string(v.s_star.dim()) + ")";
  return v;
}

IsolabilityReport isolability(const FmiiModel& m) {
  require_valid(m);
  if (m.fault_count() < 1) throw std::invalid_argument("isolability: model has no faults");
  IsolabilityReport r;
  for (int j = 0; j < m.fault_count(); ++j) r.faults.push_back(isolability_of(m, j));
  return r;
}

QuotientSystem quotient_system(const FmiiModel& m, int target) {
  const FaultVerdict v = isolability_of(m, target);
  if (!v.isolable) throw NotIsolable("fault '" + v.name + "' is not isolable: " + v.reason);

  QuotientSystem q;
  q.target = target;
  q.fault_name = v.name;
  q.s_star = v.s_star;
  q.friends = friend_maps(m, v.s_star);
  const MeasurementMaps mm = measurement_maps(m, v.s_star);
  q.P = mm.P;
  q.M = mm.M;
  q.H = mm.H;
  const Matrix pt = q.P.transpose();
  for (const auto& a : closed_loop(m, q.friends)) q.ops.push_back(q.P * a * pt);
  for (const auto& b : m.input_maps) q.inputs.push_back(q.P * b);
  if (q.inputs.empty())
    q.inputs.assign(m.order(), Matrix::Zero(q.state_dim(), 0));
  for (int j = 0; j < m.fault_count(); ++j) {
    std::vector<Matrix> projected;
    for (const auto& l : m.faults[j].maps) projected.push_back(q.P * l);
    if (j == target)
      q.target_signature = std::move(projected);
    else
      q.decoupled_signatures.push_back(std::move(projected));
  }
  return q;
}

namespace {

std::vector<Matrix> gains_or_zero(const QuotientSystem& q, const std::vector<Matrix>& gains) {
  const auto k = q.ops.size();
  if (gains.empty()) return std::vector<Matrix>(k, Matrix::Zero(q.state_dim(), q.M.rows()));
  if (gains.size() != k) throw DimensionError("observer gains: need one gain per shift operator");
  for (const auto& g : gains)
    if (g.rows() != q.state_dim() || g.cols() != q.M.rows())
      throw DimensionError("observer gain has shape " + std::to_string(g.rows()) + "x" +
                           std::to_string(g.cols()) + ", expected " + std::to_string(q.state_dim()) +
                           "x" + std::to_string(q.M.rows()));
  return gains;
}

}  // namespace

DetectionFilter assemble_filter(const QuotientSystem& q, const std::vector<Matrix>& observer_gains) {
  const auto d_o = gains_or_zero(q, observer_gains);
  DetectionFilter f;
  f.fault = q.fault_name;
  for (std::size_t i = 0; i < q.ops.size(); ++i) {
    f.F.push_back(q.ops[i] + d_o[i] * q.M);
    f.K.push_back(q.inputs[i]);
    f.E.push_back(-(q.P * q.friends[i] + d_o[i] * q.H));
  }
  f.M = q.M;
  f.H = q.H;
  f.P = q.P;
  f.D = q.friends;
  f.Do = d_o;
  return f;
}

DetectionFilter assemble_filter(const QuotientSystem& q) { return assemble_filter(q, {}); }

ErrorDynamics error_dynamics(const QuotientSystem& q, const std::vector<Matrix>& observer_gains) {
  const auto d_o = gains_or_zero(q, observer_gains);
  ErrorDynamics e;
  for (std::size_t i = 0; i < q.ops.size(); ++i) e.F.push_back(q.ops[i] + d_o[i] * q.M);
  e.fault_maps = q.target_signature;
  e.M = q.M;
  return e;
}

SynthesisResult synthesize(const FmiiModel& m, int target, GainMethod method, const SdpOptions& opt) {
  SynthesisResult out;
  out.quotient = quotient_system(m, target);
  const QuotientSystem& q = out.quotient;
  std::vector<Matrix> gains;
  if (method == GainMethod::lmi) {
    // M may repeat measurement directions when C is rank deficient; work with
    // an orthonormal row basis S M and lift the gains back through S.
    const Eigen::JacobiSVD<Matrix> svd(q.M, Eigen::ComputeFullU);
    const int r = numerical_rank(q.M, 0.0, m.tol);
    const Matrix s = svd.matrixU().leftCols(r).transpose();
    const Matrix mr = s * q.M;
    const FeasibilityOutcome fo = projected_feasibility(q.ops, mr, opt);
    out.diagnostics = fo.solver.diagnostics;
    if (!fo.certificate) throw LmiInfeasible("projected LMI infeasible for fault '" + q.fault_name + "': " + fo.solver.diagnostics);
    out.certificate = fo.certificate;
    if (r == 0) {
      gains.assign(q.ops.size(), Matrix::Zero(q.state_dim(), q.M.rows()));
    } else {
      try {
        for (const auto& g : recover_gains(q.ops, mr, *fo.certificate, opt)) gains.push_back(g * s);
      } catch (const std::runtime_error& e) {
        throw LmiInfeasible(e.what());
      }
    }
  }
  out.filter = assemble_filter(q, gains);
  if (out.certificate) out.filter.R = out.certificate->R;
  return out;
}

}  // namespace fdi2d
