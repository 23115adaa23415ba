#include "fdi2d/model.hpp"

#include <sstream>

namespace fdi2d {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

int FmiiModel::fault_index(const std::string& name) const {
  for (int j = 0; j < fault_count(); ++j)
    if (faults[j].name == name) return j;
  return -1;
}

Subspace FmiiModel::fault_subspace(int j) const {
  const auto& maps = faults.at(j).maps;
  int width = 0;
  for (const auto& l : maps) width += static_cast<int>(l.cols());
  Matrix stacked(state_dim(), width);
  int c = 0;
  for (const auto& l : maps) {
    stacked.middleCols(c, l.cols()) = l;
    c += static_cast<int>(l.cols());
  }
  return image(stacked, tol);
}

Subspace FmiiModel::other_faults_subspace(int skip) const {
  Subspace acc = Subspace::zero(state_dim(), tol);
  for (int j = 0; j < fault_count(); ++j)
    if (j != skip) acc = sum(acc, fault_subspace(j));
  return acc;
}

std::vector<std::string> validate(const FmiiModel& m) {
  std::vector<std::string> out;
  const int k = m.order();
  if (k < 1 || k > 3) out.push_back("number of shift operators must be 1, 2 or 3 (got " + std::to_string(k) + ")");
  const int n = m.state_dim();
  for (int i = 0; i < k; ++i) {
    const auto& a = m.shift_ops[i];
    if (a.rows() != n || a.cols() != n)
      out.push_back("A" + std::to_string(i + 1) + " is " + shape(a) + ", expected " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!m.input_maps.empty()) {
    if (static_cast<int>(m.input_maps.size()) != k)
      out.push_back("input map count " + std::to_string(m.input_maps.size()) + " differs from k = " + std::to_string(k));
    const auto cols = m.input_maps[0].cols();
    for (std::size_t i = 0; i < m.input_maps.size(); ++i) {
      const auto& b = m.input_maps[i];
      if (b.rows() != n || b.cols() != cols)
        out.push_back("B" + std::to_string(i + 1) + " is " + shape(b) + ", expected " + std::to_string(n) + "x" + std::to_string(cols));
    }
  }
  if (m.output_map.cols() != n)
    out.push_back("C has " + std::to_string(m.output_map.cols()) + " columns, expected " + std::to_string(n));
  for (const auto& f : m.faults) {
    if (static_cast<int>(f.maps.size()) != k) {
      out.push_back("fault '" + f.name + "' has " + std::to_string(f.maps.size()) + " signature maps, expected k = " + std::to_string(k));
      continue;
    }
    for (std::size_t i = 0; i < f.maps.size(); ++i) {
      const auto& l = f.maps[i];
      if (l.rows() != n)
        out.push_back("fault '" + f.name + "' map " + std::to_string(i + 1) + " has " + std::to_string(l.rows()) + " rows, expected " + std::to_string(n));
      if (l.cols() != f.maps[0].cols())
        out.push_back("fault '" + f.name + "' maps have inconsistent widths");
    }
  }
  for (std::size_t a = 0; a < m.faults.size(); ++a)
    for (std::size_t b = a + 1; b < m.faults.size(); ++b)
      if (m.faults[a].name == m.faults[b].name) out.push_back("duplicate fault name '" + m.faults[a].name + "'");
  return out;
}

void require_valid(const FmiiModel& m) {
  const auto diags = validate(m);
  if (diags.empty()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& d : diags) os << "\n  " << d;
  throw DimensionError(os.str());
}

std::vector<std::string> validate(const DetectionFilter& f, const FmiiModel& m) {
  std::vector<std::string> out;
  const auto o = f.M.cols();
  const auto r = f.M.rows();
  const auto k = static_cast<std::size_t>(m.order());
  if (f.F.size() != k || f.K.size() != k || f.E.size() != k) {
    out.push_back("filter gain lists must have k = " + std::to_string(k) + " entries");
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::string s = std::to_string(i + 1);
    if (f.F[i].rows() != o || f.F[i].cols() != o) out.push_back("F" + s + " is " + shape(f.F[i]));
    if (f.K[i].rows() != o || f.K[i].cols() != m.input_dim()) out.push_back("K" + s + " is " + shape(f.K[i]));
    if (f.E[i].rows() != o || f.E[i].cols() != m.output_dim()) out.push_back("E" + s + " is " + shape(f.E[i]));
  }
  if (f.H.rows() != r || f.H.cols() != m.output_dim()) out.push_back("H is " + shape(f.H));
  if (f.P.size() != 0 && (f.P.rows() != o || f.P.cols() != m.state_dim())) out.push_back("P is " + shape(f.P));
  return out;
}

FmiiModel roesser_to_fmii(const RoesserModel& r) {
  const auto nr = r.a11.rows();
  const auto ns = r.a22.rows();
  const auto n = nr + ns;
  if (r.a11.cols() != nr || r.a12.rows() != nr || r.a12.cols() != ns || r.a21.rows() != ns ||
      r.a21.cols() != nr || r.a22.cols() != ns)
    throw DimensionError("roesser_to_fmii: state blocks do not conform");
  const auto m = r.b11.cols();
  if (r.b11.rows() != nr || r.b21.rows() != ns || r.b21.cols() != m)
    throw DimensionError("roesser_to_fmii: input blocks do not conform");
  if (r.c.cols() != n) throw DimensionError("roesser_to_fmii: C does not conform");

  FmiiModel f;
  Matrix a1 = Matrix::Zero(n, n), a2 = Matrix::Zero(n, n);
  a1.topLeftCorner(nr, nr) = r.a11;
  a1.topRightCorner(nr, ns) = r.a12;
  a2.bottomLeftCorner(ns, nr) = r.a21;
  a2.bottomRightCorner(ns, ns) = r.a22;
  Matrix b1 = Matrix::Zero(n, m), b2 = Matrix::Zero(n, m);
  b1.topRows(nr) = r.b11;
  b2.bottomRows(ns) = r.b21;
  f.shift_ops = {a1, a2};
  f.input_maps = {b1, b2};
  f.output_map = r.c;
  for (const auto& fault : r.faults) {
    if (fault.signature.rows() != n) throw DimensionError("roesser_to_fmii: fault '" + fault.name + "' has wrong row count");
    Matrix l1 = Matrix::Zero(n, fault.signature.cols()), l2 = l1;
    l1.topRows(nr) = fault.signature.topRows(nr);
    l2.bottomRows(ns) = fault.signature.bottomRows(ns);
    f.faults.push_back({fault.name, {l1, l2}});
  }
  return f;
}

}  // namespace fdi2d
