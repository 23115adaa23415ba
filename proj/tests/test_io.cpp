#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "common.hpp"
#include "fdi2d/demo.hpp"
#include "fdi2d/io.hpp"
#include "fdi2d/pde.hpp"
#include "fdi2d/synthesis.hpp"

using namespace fdi2d;
using io::json;
using testing_support::random_matrix;

namespace {

FmiiModel random_model(std::mt19937_64& rng, int n, int m, int q, int k) {
  FmiiModel s;
  for (int i = 0; i < k; ++i) {
    s.shift_ops.push_back(random_matrix(rng, n, n));
    s.input_maps.push_back(random_matrix(rng, n, m));
  }
  s.output_map = random_matrix(rng, q, n);
  for (int f = 0; f < 2; ++f) {
    std::vector<Matrix> maps;
    for (int i = 0; i < k; ++i) maps.push_back(random_matrix(rng, n, 1 + f));
    s.faults.push_back({"f" + std::to_string(f + 1), maps});
  }
  return s;
}

bool same(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

void check_same(const FmiiModel& a, const FmiiModel& b) {
  REQUIRE(a.order() == b.order());
  CHECK(a.input_dim() == b.input_dim());
  for (int i = 0; i < a.order(); ++i) {
    CHECK(same(a.shift_ops[i], b.shift_ops[i]));
    if (a.input_dim() > 0) CHECK(same(a.input_maps[i], b.input_maps[i]));
  }
  CHECK(same(a.output_map, b.output_map));
  REQUIRE(a.fault_count() == b.fault_count());
  for (int f = 0; f < a.fault_count(); ++f) {
    CHECK(a.faults[f].name == b.faults[f].name);
    for (int i = 0; i < a.order(); ++i) CHECK(same(a.faults[f].maps[i], b.faults[f].maps[i]));
  }
}

}  // namespace

TEST_CASE("model round trip is bit exact") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const FmiiModel m = random_model(rng, 2 + t % 4, t % 3, 1 + t % 2, 1 + t % 3);
    // through text, not just the json tree
    const json j = json::parse(io::model_to_json(m).dump());
    check_same(m, io::model_from_json(j));
  }
  check_same(heat_exchanger(Measurement::full), io::model_from_json(io::model_to_json(heat_exchanger(Measurement::full))));
}

TEST_CASE("model parsing accepts vector fault maps and omitted B") {
  const json j = json::parse(R"({
    "A": [[[0.5, 0], [0, 0.5]], [[0, 0], [0, 0]]],
    "C": [[1, 0]],
    "faults": [{"name": "leak", "L": [[0, 1], [[0], [0]]]}],
    "tolerances": {"rank_rel": 1e-9}
  })");
  const FmiiModel m = io::model_from_json(j);
  CHECK(m.state_dim() == 2);
  CHECK(m.input_dim() == 0);
  CHECK(m.faults[0].name == "leak");
  CHECK(m.faults[0].maps[0](1, 0) == 1.0);
  CHECK(m.tol.rank_rel == 1e-9);
}

TEST_CASE("malformed or invalid models raise ParseError") {
  const char* bad[] = {
      R"([1, 2])",
      R"({"C": [[1, 0]]})",
      R"({"A": [[[1, 0], [0, 1]]], "C": [[1, 0, 0]]})",
      R"({"A": [[[1, 0], [0]]], "C": [[1, 0]]})",
      R"({"A": [[["x", 0], [0, 1]]], "C": [[1, 0]]})",
      R"({"A": [[[1, 0], [0, 1]]], "C": [[1, 0]], "n": 3})",
      R"({"A": [[[1, 0], [0, 1]]], "C": [[1, 0]], "faults": [{"name": "f"}]})",
      R"({"A": [[[1, 0], [0, 1]]], "C": [[1, 0]], "tolerances": {"angle": -1}})",
  };
  for (const char* text : bad) {
    INFO(text);
    CHECK_THROWS_AS(io::model_from_json(json::parse(text)), io::ParseError);
  }
}

TEST_CASE("filter round trip") {
  const SynthesisResult r = synthesize(heat_exchanger(Measurement::full), 1, GainMethod::lmi);
  const DetectionFilter f = io::filter_from_json(json::parse(io::filter_to_json(r.filter).dump()));
  CHECK(f.fault == r.filter.fault);
  CHECK(f.M == r.filter.M);
  CHECK(f.H == r.filter.H);
  CHECK(f.P == r.filter.P);
  REQUIRE(f.F.size() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK(f.F[i] == r.filter.F[i]);
    CHECK(f.K[i] == r.filter.K[i]);
    CHECK(f.E[i] == r.filter.E[i]);
    CHECK(f.Do[i] == r.filter.Do[i]);
    CHECK(f.R[i] == r.filter.R[i]);
  }
  CHECK(validate(f, heat_exchanger(Measurement::full)).empty());
  CHECK_THROWS_AS(io::filter_from_json(json::parse(R"({"M": [[1]], "H": [[1]]})")), io::ParseError);
}

TEST_CASE("scenario parsing") {
  const FmiiModel m = heat_exchanger(Measurement::full);
  const json j = json::parse(R"({
    "i_max": 6, "j_max": 5,
    "boundary": {"h1": "zero", "h2": {"constant": [1, 2, 3, 4], "from": 1}},
    "input": {"constant": [1, 0.5], "from_j": 2},
    "faults": [{"fault": "f2", "i": 3, "j_min": 2, "severity": 0.7},
               {"fault": "f1", "j_min": 4, "shape": "pulse"}],
    "noise_std": 0.01,
    "seed": 42
  })");
  const io::ScenarioDocument doc = io::scenario_from_json(j, m);
  const Scenario& s = doc.scenario;
  CHECK(s.i_max == 6);
  CHECK(s.j_max == 5);
  CHECK(s.h1.isZero());
  CHECK(s.h2.col(0).isZero());
  CHECK(s.h2(3, 5) == 4.0);
  CHECK(s.inputs.at(4, 1).isZero());
  CHECK(s.inputs.at(4, 2)(1) == 0.5);
  REQUIRE(s.faults.size() == 2);
  CHECK(s.faults[0].fault == 1);
  CHECK(s.faults[0].i_min == 3);
  CHECK(s.faults[0].i_max == 3);
  CHECK(s.fault_value(1, 3, 2) == doctest::Approx(0.7));
  CHECK(s.fault_value(1, 2, 2) == 0.0);
  CHECK(s.faults[1].shape == FaultShape::pulse);
  CHECK(s.faults[1].i_max == 6);
  CHECK(s.noise_std == 0.01);
  CHECK(doc.seed == 42u);

  CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"i_max": 3})"), m), io::ParseError);
  CHECK_THROWS_AS(io::scenario_from_json(json::parse(R"({"i_max": 3, "j_max": 3, "faults": [{"fault": "nope"}]})"), m),
                  io::ParseError);
  CHECK_THROWS_AS(
      io::scenario_from_json(json::parse(R"({"i_max": 3, "j_max": 3, "boundary": {"h1": {"constant": [1]}}})"), m),
      io::ParseError);
  CHECK_THROWS_AS(
      io::scenario_from_json(json::parse(R"({"i_max": 3, "j_max": 3, "faults": [{"fault": "f1", "shape": "ramp"}]})"),
                             m),
      io::ParseError);
}

TEST_CASE("polynomial matrix and thresholds round trip") {
  const BivarPolyMatrix n = fixtures::counterexample_corrected_annihilator();
  const BivarPolyMatrix back = io::polymatrix_from_json(json::parse(io::polymatrix_to_json(n).dump()));
  REQUIRE(back.rows() == n.rows());
  REQUIRE(back.cols() == n.cols());
  CHECK((back - n).max_abs_coeff() == 0.0);
  const BivarPolyMatrix scalar = io::polymatrix_from_json(json::parse(R"({"rows": 1, "cols": 2, "entries": [[3, [[0, 1], [2, 0]]]]})"));
  CHECK(scalar(0, 0)(Complex(5.0), Complex(7.0)) == Complex(3.0));
  CHECK(scalar(0, 1)(Complex(5.0), Complex(7.0)) == Complex(17.0));

  ThresholdSpec t;
  t.runs = 17;
  t.horizon = 9;
  t.thresholds = {0.125, 3.0e-7};
  const json tj = io::thresholds_to_json(t, {"f1", "f2"}, 2024);
  CHECK(tj.at("seed") == 2024);
  const ThresholdSpec tb = io::thresholds_from_json(json::parse(tj.dump()));
  CHECK(tb.runs == 17);
  CHECK(tb.horizon == 9);
  CHECK(tb.thresholds == t.thresholds);
  CHECK_THROWS_AS(io::thresholds_from_json(json::parse(R"({"thresholds": [-1]})")), io::ParseError);
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "fdi2d_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.json").string();
  io::write_json_file(path, io::model_to_json(fixtures::counterexample()));
  check_same(fixtures::counterexample(), io::model_from_json(io::read_json_file(path)));
  CHECK_THROWS_AS(io::read_json_file((dir / "missing.json").string()), io::ParseError);
  {
    std::FILE* f = std::fopen((dir / "broken.json").string().c_str(), "w");
    std::fputs("{\"A\": [", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(io::read_json_file((dir / "broken.json").string()), io::ParseError);
  std::filesystem::remove_all(dir);
}
