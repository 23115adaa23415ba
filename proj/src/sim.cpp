#include "fdi2d/sim.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <sstream>

namespace fdi2d {

Plane::Plane(int i_max, int j_max, int width)
    : i_max_(i_max), j_max_(j_max), data_(Matrix::Zero(width, (i_max + 1) * (j_max + 1))) {}

bool FaultEvent::active(int i, int j) const {
  if (i < i_min || i > i_max || j < j_min) return false;
  return shape == FaultShape::step || j <= j_max;
}

double Scenario::fault_value(int fault, int i, int j) const {
  double v = 0.0;
  for (const auto& e : faults)
    if (e.fault == fault && e.active(i, j)) v += e.severity;
  return v;
}

Scenario quiet_scenario(const FmiiModel& m, int i_max, int j_max) {
  Scenario s;
  s.i_max = i_max;
  s.j_max = j_max;
  s.h1 = Matrix::Zero(m.state_dim(), i_max + 1);
  s.h2 = Matrix::Zero(m.state_dim(), j_max + 1);
  if (m.input_dim() > 0) s.inputs = Plane(i_max, j_max, m.input_dim());
  return s;
}

std::vector<std::string> validate(const Scenario& s, const FmiiModel& m) {
  std::vector<std::string> out;
  if (m.order() != 2) out.push_back("simulation needs exactly two shift operators");
  if (s.i_max < 0 || s.j_max < 0) out.push_back("grid extents must be non-negative");
  if (s.h1.rows() != m.state_dim() || s.h1.cols() != s.i_max + 1)
    out.push_back("h1 must be " + std::to_string(m.state_dim()) + "x" + std::to_string(s.i_max + 1));
  if (s.h2.rows() != m.state_dim() || s.h2.cols() != s.j_max + 1)
    out.push_back("h2 must be " + std::to_string(m.state_dim()) + "x" + std::to_string(s.j_max + 1));
  if (out.empty() && (s.h1.col(0) - s.h2.col(0)).cwiseAbs().maxCoeff() > 0.0)
    out.push_back("boundary data disagree at the corner (h1(0) != h2(0))");
  if (m.input_dim() > 0 &&
      (s.inputs.width() != m.input_dim() || s.inputs.i_max() != s.i_max || s.inputs.j_max() != s.j_max))
    out.push_back("input plane does not match the grid and input dimension");
  for (const auto& e : s.faults) {
    if (e.fault < 0 || e.fault >= m.fault_count()) out.push_back("fault schedule refers to an unknown fault");
    if (e.i_min > e.i_max || (e.shape == FaultShape::pulse && e.j_min > e.j_max))
      out.push_back("fault schedule has an empty window");
  }
  if (s.noise_std < 0.0) out.push_back("noise standard deviation must be non-negative");
  return out;
}

namespace {

void require_valid_scenario(const Scenario& s, const FmiiModel& m) {
  const auto d = validate(s, m);
  if (d.empty()) return;
  std::ostringstream os;
  os << "invalid scenario:";
  for (const auto& x : d) os << "\n  " << x;
  throw DimensionError(os.str());
}

template <class F>
void sweep(int i_max, int j_max, FillOrder order, F&& node) {
  if (order == FillOrder::row_major) {
    for (int i = 1; i <= i_max; ++i)
      for (int j = 1; j <= j_max; ++j) node(i, j);
    return;
  }
  for (int d = 2; d <= i_max + j_max; ++d)
    for (int i = std::max(1, d - j_max); i <= std::min(i_max, d - 1); ++i) node(i, d - i);
}

}  // namespace

Grid2D simulate_plant(const FmiiModel& m, const Scenario& s, std::uint64_t seed, FillOrder order) {
  require_valid(m);
  require_valid_scenario(s, m);
  const int n = m.state_dim();
  Grid2D g{Plane(s.i_max, s.j_max, n), Plane(s.i_max, s.j_max, m.output_dim())};
  for (int i = 0; i <= s.i_max; ++i) g.states.at(i, 0) = s.h1.col(i);
  for (int j = 0; j <= s.j_max; ++j) g.states.at(0, j) = s.h2.col(j);

  const auto& a = m.shift_ops;
  const bool has_input = m.input_dim() > 0;
  sweep(s.i_max, s.j_max, order, [&](int i, int j) {
    Vector x = a[0] * g.states.at(i - 1, j) + a[1] * g.states.at(i, j - 1);
    if (has_input) x += m.input_maps[0] * s.inputs.at(i - 1, j) + m.input_maps[1] * s.inputs.at(i, j - 1);
    for (int k = 0; k < m.fault_count(); ++k) {
      const auto& l = m.faults[k].maps;
      const double f1 = s.fault_value(k, i - 1, j);
      const double f2 = s.fault_value(k, i, j - 1);
      if (f1 != 0.0) x += f1 * l[0].rowwise().sum();
      if (f2 != 0.0) x += f2 * l[1].rowwise().sum();
    }
    g.states.at(i, j) = x;
  });

  g.outputs.data() = m.output_map * g.states.data();
  if (s.noise_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, s.noise_std);
    Matrix& y = g.outputs.data();
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, c) += noise(rng);
  }
  return g;
}

FilterRun simulate_filter(const DetectionFilter& f, const Plane& y, const Plane& u, const Scenario& s) {
  const int o = f.state_dim();
  if (f.F.size() != 2 || f.K.size() != 2 || f.E.size() != 2)
    throw DimensionError("simulate_filter: filter must have two shift slots");
  if (y.i_max() != s.i_max || y.j_max() != s.j_max || y.width() != f.H.cols())
    throw DimensionError("simulate_filter: output plane does not match the filter");
  const bool has_input = f.K[0].cols() > 0;
  if (has_input && (u.i_max() != s.i_max || u.j_max() != s.j_max || u.width() != f.K[0].cols()))
    throw DimensionError("simulate_filter: input plane does not match the filter");

  FilterRun run;
  run.estimates = Plane(s.i_max, s.j_max, o);
  if (f.P.size() != 0) {
    if (f.P.cols() != s.h1.rows()) throw DimensionError("simulate_filter: P does not match the boundary data");
    for (int i = 0; i <= s.i_max; ++i) run.estimates.at(i, 0) = f.P * s.h1.col(i);
    for (int j = 0; j <= s.j_max; ++j) run.estimates.at(0, j) = f.P * s.h2.col(j);
  }
  sweep(s.i_max, s.j_max, FillOrder::antidiagonal, [&](int i, int j) {
    Vector w = f.F[0] * run.estimates.at(i - 1, j) + f.F[1] * run.estimates.at(i, j - 1) +
               f.E[0] * y.at(i - 1, j) + f.E[1] * y.at(i, j - 1);
    if (has_input) w += f.K[0] * u.at(i - 1, j) + f.K[1] * u.at(i, j - 1);
    run.estimates.at(i, j) = w;
  });
  run.residuals = Plane(s.i_max, s.j_max, f.residual_dim());
  run.residuals.data() = f.M * run.estimates.data() - f.H * y.data();
  run.norms.resize(run.residuals.data().cols());
  for (Eigen::Index c = 0; c < run.residuals.data().cols(); ++c) run.norms[c] = run.residuals.data().col(c).norm();
  return run;
}

ThresholdSpec threshold_mc(const FmiiModel& m, const std::vector<DetectionFilter>& filters, const Scenario& base,
                           ThresholdSpec spec, std::uint64_t seed) {
  if (spec.runs < 1) throw std::invalid_argument("threshold_mc: need at least one run");
  spec.thresholds.assign(filters.size(), 0.0);
  const int hi = spec.horizon < 0 ? base.i_max : std::min(spec.horizon, base.i_max);
  const int hj = spec.horizon < 0 ? base.j_max : std::min(spec.horizon, base.j_max);
  Scenario nominal = base;
  nominal.faults.clear();
  for (int run = 0; run < spec.runs; ++run) {
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(run)};
    std::mt19937_64 rng(seq);
    Scenario noisy = nominal;
    if (base.noise_std > 0.0) {
      std::normal_distribution<double> g(0.0, base.noise_std);
      for (Eigen::Index c = 0; c < noisy.h1.cols(); ++c)
        for (Eigen::Index r = 0; r < noisy.h1.rows(); ++r) noisy.h1(r, c) += g(rng);
      for (Eigen::Index c = 1; c < noisy.h2.cols(); ++c)
        for (Eigen::Index r = 0; r < noisy.h2.rows(); ++r) noisy.h2(r, c) += g(rng);
      noisy.h2.col(0) = noisy.h1.col(0);
    }
    const Grid2D grid = simulate_plant(m, noisy, rng());
    for (std::size_t k = 0; k < filters.size(); ++k) {
      const FilterRun r = simulate_filter(filters[k], grid.outputs, nominal.inputs, nominal);
      for (int i = 0; i <= hi; ++i)
        for (int j = 0; j <= hj; ++j) spec.thresholds[k] = std::max(spec.thresholds[k], r.norm(i, j));
    }
  }
  return spec;
}

std::vector<AlarmPlane> fdi_decide(const std::vector<FilterRun>& runs, const std::vector<double>& thresholds) {
  if (runs.size() != thresholds.size()) throw DimensionError("fdi_decide: one threshold per residual is required");
  std::vector<AlarmPlane> out;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (thresholds[k] < 0.0) throw std::invalid_argument("fdi_decide: negative threshold");
    const auto& p = runs[k].residuals;
    AlarmPlane a(p.i_max() + 1, std::vector<bool>(p.j_max() + 1, false));
    for (int i = 0; i <= p.i_max(); ++i)
      for (int j = 0; j <= p.j_max(); ++j) a[i][j] = runs[k].norm(i, j) > thresholds[k];
    out.push_back(std::move(a));
  }
  return out;
}

void write_residual_csv(std::ostream& os, const std::vector<FilterRun>& runs, const std::vector<AlarmPlane>& alarms) {
  if (runs.empty()) throw std::invalid_argument("write_residual_csv: no residuals");
  const auto p = runs.size();
  os << "i,j";
  for (std::size_t k = 1; k <= p; ++k) os << ",r" << k;
  for (std::size_t k = 1; k <= p; ++k) os << ",alarm" << k;
  os << '\n';
  const auto& ref = runs[0].residuals;
  const auto prec = os.precision(12);
  for (int i = 0; i <= ref.i_max(); ++i)
    for (int j = 0; j <= ref.j_max(); ++j) {
      os << i << ',' << j;
      for (const auto& r : runs) os << ',' << r.norm(i, j);
      for (std::size_t k = 0; k < p; ++k) os << ',' << (k < alarms.size() && alarms[k][i][j] ? 1 : 0);
      os << '\n';
    }
  os.precision(prec);
}

}  // namespace fdi2d
