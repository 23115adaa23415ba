#include "fdi2d/io.hpp"

#include <fstream>
#include <sstream>

namespace fdi2d::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

const json& field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) fail(ctx + ": missing field '" + key + "'");
  return j.at(key);
}

int int_field(const json& j, const char* key, const std::string& ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_number_integer()) fail(ctx + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) fail(what + ": expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(what + ": entry " + std::to_string(i) + " is not a number");
    v(i) = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

bool is_flat_numbers(const json& j) {
  if (!j.is_array() || j.empty()) return false;
  for (const auto& e : j)
    if (!e.is_number()) return false;
  return true;
}

std::vector<Matrix> matrix_list(const json& j, const std::string& what, Eigen::Index cols_hint) {
  if (!j.is_array()) fail(what + ": expected a list of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(matrix_from_json(j[i], what + "[" + std::to_string(i) + "]", cols_hint));
  return out;
}

// "zero", {"constant": v, "from": k}, or an explicit list of vectors
Matrix boundary_from_json(const json& j, int n, int count, const std::string& what) {
  Matrix h = Matrix::Zero(n, count);
  if (j.is_string()) {
    if (j.get<std::string>() != "zero") fail(what + ": unknown boundary keyword");
    return h;
  }
  if (j.is_object()) {
    const Vector v = vector_from_json(field(j, "constant", what), what + ".constant");
    if (v.size() != n) fail(what + ".constant must have " + std::to_string(n) + " entries");
    const int from = j.contains("from") ? j.at("from").get<int>() : 0;
    for (int c = std::max(from, 0); c < count; ++c) h.col(c) = v;
    return h;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != count)
    fail(what + ": expected " + std::to_string(count) + " boundary vectors");
  for (int c = 0; c < count; ++c) {
    const Vector v = vector_from_json(j[c], what);
    if (v.size() != n) fail(what + ": boundary vector has the wrong size");
    h.col(c) = v;
  }
  return h;
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index cols_hint) {
  if (!j.is_array()) fail(what + ": expected a row-major nested array");
  if (j.empty()) return Matrix(0, cols_hint);
  if (!j[0].is_array()) fail(what + ": expected a row-major nested array (rows must be arrays)");
  const auto cols = j[0].size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(what + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(what + ": non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

json model_to_json(const FmiiModel& m) {
  json j;
  j["n"] = m.state_dim();
  j["m"] = m.input_dim();
  j["q"] = m.output_dim();
  j["k"] = m.order();
  j["A"] = json::array();
  for (const auto& a : m.shift_ops) j["A"].push_back(matrix_to_json(a));
  j["B"] = json::array();
  for (const auto& b : m.input_maps) j["B"].push_back(matrix_to_json(b));
  j["C"] = matrix_to_json(m.output_map);
  j["faults"] = json::array();
  for (const auto& f : m.faults) {
    json l = json::array();
    for (const auto& x : f.maps) l.push_back(matrix_to_json(x));
    j["faults"].push_back({{"name", f.name}, {"L", l}});
  }
  j["tolerances"] = {{"rank_rel", m.tol.rank_rel}, {"angle", m.tol.angle}};
  return j;
}

FmiiModel model_from_json(const json& j) {
  const std::string ctx = "system";
  if (!j.is_object()) fail("system: document must be a JSON object");
  FmiiModel m;
  m.shift_ops = matrix_list(field(j, "A", ctx), "A", 0);
  if (m.shift_ops.empty()) fail("system: 'A' must list at least one matrix");
  const Eigen::Index n = m.shift_ops[0].cols();
  m.output_map = matrix_from_json(field(j, "C", ctx), "C", n);
  if (j.contains("B")) m.input_maps = matrix_list(j.at("B"), "B", 0);
  // an n x 0 input map written as n empty rows, or omitted entirely
  if (m.input_maps.empty()) m.input_maps.assign(m.shift_ops.size(), Matrix::Zero(n, 0));
  for (auto& b : m.input_maps)
    if (b.rows() == 0 && n > 0) b = Matrix::Zero(n, 0);
  if (j.contains("faults")) {
    const json& fs = j.at("faults");
    if (!fs.is_array()) fail("system: 'faults' must be a list");
    for (std::size_t i = 0; i < fs.size(); ++i) {
      FaultSignature f;
      f.name = fs[i].contains("name") ? fs[i].at("name").get<std::string>() : "f" + std::to_string(i + 1);
      const json& ls = field(fs[i], "L", "fault '" + f.name + "'");
      if (!ls.is_array()) fail("fault '" + f.name + "': 'L' must list one map per shift operator");
      for (std::size_t s = 0; s < ls.size(); ++s) {
        const std::string what = "fault '" + f.name + "' L[" + std::to_string(s) + "]";
        if (is_flat_numbers(ls[s]))
          f.maps.push_back(vector_from_json(ls[s], what));
        else
          f.maps.push_back(matrix_from_json(ls[s], what, 1));
      }
      m.faults.push_back(std::move(f));
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (t.contains("rank_rel")) m.tol.rank_rel = t.at("rank_rel").get<double>();
    if (t.contains("angle")) m.tol.angle = t.at("angle").get<double>();
    if (!(m.tol.rank_rel > 0.0) || !(m.tol.angle > 0.0)) fail("system: tolerances must be positive");
  }
  auto diags = validate(m);
  auto check = [&](const char* key, int actual) {
    if (j.contains(key) && j.at(key).get<int>() != actual)
      diags.push_back(std::string("declared ") + key + " = " + std::to_string(j.at(key).get<int>()) +
                      " but the matrices give " + std::to_string(actual));
  };
  if (diags.empty()) {
    check("n", m.state_dim());
    check("m", m.input_dim());
    check("q", m.output_dim());
    check("k", m.order());
  }
  if (!diags.empty()) {
    std::ostringstream os;
    os << "system validation failed:";
    for (const auto& d : diags) os << "\n  " << d;
    fail(os.str());
  }
  return m;
}

json filter_to_json(const DetectionFilter& f) {
  json j;
  j["fault"] = f.fault;
  auto put = [&](const char* name, const std::vector<Matrix>& list) {
    for (std::size_t i = 0; i < list.size(); ++i) j[name + std::to_string(i + 1)] = matrix_to_json(list[i]);
  };
  put("F", f.F);
  put("K", f.K);
  put("E", f.E);
  j["M"] = matrix_to_json(f.M);
  j["H"] = matrix_to_json(f.H);
  if (f.P.size() != 0) j["P"] = matrix_to_json(f.P);
  put("D", f.D);
  put("Do", f.Do);
  put("R", f.R);
  return j;
}

DetectionFilter filter_from_json(const json& j) {
  if (!j.is_object()) fail("filter: document must be a JSON object");
  DetectionFilter f;
  if (j.contains("fault")) f.fault = j.at("fault").get<std::string>();
  f.M = matrix_from_json(field(j, "M", "filter"), "M");
  f.H = matrix_from_json(field(j, "H", "filter"), "H");
  auto get = [&](const std::string& name, bool required) {
    std::vector<Matrix> out;
    for (int i = 1; i <= 3; ++i) {
      const std::string key = name + std::to_string(i);
      if (!j.contains(key)) break;
      out.push_back(matrix_from_json(j.at(key), key, f.M.cols()));
    }
    if (required && out.empty()) fail("filter: missing " + name + "1");
    return out;
  };
  f.F = get("F", true);
  f.K = get("K", true);
  f.E = get("E", true);
  if (f.F.size() != f.K.size() || f.F.size() != f.E.size()) fail("filter: F, K and E lists differ in length");
  for (auto& k : f.K)
    if (k.rows() == 0) k = Matrix::Zero(f.M.cols(), 0);
  if (j.contains("P")) f.P = matrix_from_json(j.at("P"), "P");
  f.D = get("D", false);
  f.Do = get("Do", false);
  f.R = get("R", false);
  return f;
}

ScenarioDocument scenario_from_json(const json& j, const FmiiModel& m) {
  const std::string ctx = "scenario";
  if (!j.is_object()) fail("scenario: document must be a JSON object");
  ScenarioDocument doc;
  Scenario& s = doc.scenario;
  s.i_max = int_field(j, "i_max", ctx);
  s.j_max = int_field(j, "j_max", ctx);
  if (s.i_max < 0 || s.j_max < 0) fail("scenario: extents must be non-negative");
  const int n = m.state_dim();
  s.h1 = Matrix::Zero(n, s.i_max + 1);
  s.h2 = Matrix::Zero(n, s.j_max + 1);
  if (j.contains("boundary")) {
    const json& b = j.at("boundary");
    if (b.contains("h1")) s.h1 = boundary_from_json(b.at("h1"), n, s.i_max + 1, "boundary.h1");
    if (b.contains("h2")) s.h2 = boundary_from_json(b.at("h2"), n, s.j_max + 1, "boundary.h2");
  }
  const int mi = m.input_dim();
  if (mi > 0) {
    s.inputs = Plane(s.i_max, s.j_max, mi);
    if (j.contains("input") && !(j.at("input").is_string() && j.at("input").get<std::string>() == "zero")) {
      const json& u = j.at("input");
      if (u.contains("constant")) {
        const Vector v = vector_from_json(u.at("constant"), "input.constant");
        if (v.size() != mi) fail("input.constant must have " + std::to_string(mi) + " entries");
        const int from = u.contains("from_j") ? u.at("from_j").get<int>() : 0;
        for (int i = 0; i <= s.i_max; ++i)
          for (int jj = std::max(from, 0); jj <= s.j_max; ++jj) s.inputs.at(i, jj) = v;
      } else if (u.contains("per_j")) {
        const Matrix cols = boundary_from_json(u.at("per_j"), mi, s.j_max + 1, "input.per_j");
        for (int i = 0; i <= s.i_max; ++i)
          for (int jj = 0; jj <= s.j_max; ++jj) s.inputs.at(i, jj) = cols.col(jj);
      } else {
        fail("input: expected \"zero\", {\"constant\": ...} or {\"per_j\": ...}");
      }
    }
  }
  if (j.contains("faults")) {
    for (const auto& e : j.at("faults")) {
      FaultEvent ev;
      const std::string name = field(e, "fault", "fault event").get<std::string>();
      ev.fault = m.fault_index(name);
      if (ev.fault < 0) fail("fault event refers to unknown fault '" + name + "'");
      if (e.contains("i")) {
        ev.i_min = ev.i_max = e.at("i").get<int>();
      } else {
        ev.i_min = e.value("i_min", 0);
        ev.i_max = e.value("i_max", s.i_max);
      }
      ev.j_min = e.value("j_min", 0);
      ev.j_max = e.value("j_max", s.j_max);
      ev.severity = e.value("severity", 1.0);
      const std::string shape = e.value("shape", std::string("step"));
      if (shape == "step")
        ev.shape = FaultShape::step;
      else if (shape == "pulse")
        ev.shape = FaultShape::pulse;
      else
        fail("fault event: shape must be \"step\" or \"pulse\"");
      s.faults.push_back(ev);
    }
  }
  s.noise_std = j.value("noise_std", 0.0);
  if (j.contains("seed")) doc.seed = j.at("seed").get<std::uint64_t>();
  const auto diags = validate(s, m);
  if (!diags.empty()) {
    std::ostringstream os;
    os << "scenario validation failed:";
    for (const auto& d : diags) os << "\n  " << d;
    fail(os.str());
  }
  return doc;
}

json polymatrix_to_json(const BivarPolyMatrix& p) {
  json entries = json::array();
  for (int r = 0; r < p.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < p.cols(); ++c) row.push_back(matrix_to_json(p(r, c).coeffs()));
    entries.push_back(std::move(row));
  }
  return {{"rows", p.rows()}, {"cols", p.cols()}, {"entries", entries}};
}

BivarPolyMatrix polymatrix_from_json(const json& j) {
  const std::string ctx = "polynomial matrix";
  const int rows = int_field(j, "rows", ctx), cols = int_field(j, "cols", ctx);
  const json& e = field(j, "entries", ctx);
  if (!e.is_array() || static_cast<int>(e.size()) != rows) fail(ctx + ": entries must have 'rows' rows");
  BivarPolyMatrix p(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!e[r].is_array() || static_cast<int>(e[r].size()) != cols) fail(ctx + ": ragged entries");
    for (int c = 0; c < cols; ++c) {
      const json& t = e[r][c];
      if (t.is_number())
        p(r, c) = BivarPoly(t.get<double>());
      else
        p(r, c) = BivarPoly(matrix_from_json(t, ctx + " entry"));
    }
  }
  return p;
}

json thresholds_to_json(const ThresholdSpec& t, const std::vector<std::string>& names, std::uint64_t seed) {
  return {{"runs", t.runs}, {"horizon", t.horizon}, {"seed", seed}, {"filters", names}, {"thresholds", t.thresholds}};
}

ThresholdSpec thresholds_from_json(const json& j) {
  ThresholdSpec t;
  t.runs = j.value("runs", 0);
  t.horizon = j.value("horizon", -1);
  const json& th = field(j, "thresholds", "thresholds");
  for (const auto& v : th) {
    if (!v.is_number() || v.get<double>() < 0.0) fail("thresholds must be non-negative numbers");
    t.thresholds.push_back(v.get<double>());
  }
  return t;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace fdi2d::io
