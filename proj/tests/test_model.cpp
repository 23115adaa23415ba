#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "fdi2d/demo.hpp"
#include "fdi2d/pde.hpp"
#include "fdi2d/sim.hpp"

using namespace fdi2d;
using testing_support::max_abs;
using testing_support::random_matrix;

namespace {

RoesserModel random_roesser(std::mt19937_64& rng, int nr, int ns, int m) {
  RoesserModel r;
  r.a11 = random_matrix(rng, nr, nr, 0.5);
  r.a12 = random_matrix(rng, nr, ns, 0.5);
  r.a21 = random_matrix(rng, ns, nr, 0.5);
  r.a22 = random_matrix(rng, ns, ns, 0.5);
  r.b11 = random_matrix(rng, nr, m);
  r.b21 = random_matrix(rng, ns, m);
  r.c = random_matrix(rng, 1, nr + ns);
  r.faults.push_back({"f", random_matrix(rng, nr + ns, 1)});
  return r;
}

}  // namespace

TEST_CASE("roesser_to_fmii block layout") {
  RoesserModel z;
  z.a11 = z.a12 = z.a21 = z.a22 = Matrix::Zero(2, 2);
  z.b11 = z.b21 = Matrix::Zero(2, 1);
  z.c = Matrix::Zero(1, 4);
  const FmiiModel f = roesser_to_fmii(z);
  CHECK(validate(f).empty());
  CHECK(max_abs(f.shift_ops[0]) == 0.0);
  CHECK(max_abs(f.shift_ops[1]) == 0.0);

  RoesserModel id = z;
  id.a11 = id.a22 = Matrix::Identity(2, 2);
  const FmiiModel g = roesser_to_fmii(id);
  Matrix a1 = Matrix::Zero(4, 4), a2 = Matrix::Zero(4, 4);
  a1.topLeftCorner(2, 2).setIdentity();
  a2.bottomRightCorner(2, 2).setIdentity();
  CHECK(g.shift_ops[0] == a1);
  CHECK(g.shift_ops[1] == a2);

  RoesserModel bad = z;
  bad.a12 = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(roesser_to_fmii(bad), DimensionError);
}

TEST_CASE("embedded model reproduces the Roesser recursion") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const int nr = 1 + t % 3, ns = 1 + (t / 3) % 3, m = 1 + t % 2;
    const RoesserModel r = random_roesser(rng, nr, ns, m);
    const FmiiModel f = roesser_to_fmii(r);
    REQUIRE(validate(f).empty());
    const int n = nr + ns, ext = 5;
    Scenario s = quiet_scenario(f, ext, ext);
    s.h1 = random_matrix(rng, n, ext + 1);
    s.h2 = random_matrix(rng, n, ext + 1);
    s.h2.col(0) = s.h1.col(0);
    s.inputs.data() = random_matrix(rng, m, (ext + 1) * (ext + 1));
    s.faults.push_back({0, 1, 3, 2, 0, 0.7, FaultShape::step});
    const Grid2D g = simulate_plant(f, s);

    // horizontal part advances along i, vertical along j
    Plane x(ext, ext, n);
    for (int i = 0; i <= ext; ++i) x.at(i, 0) = s.h1.col(i);
    for (int j = 0; j <= ext; ++j) x.at(0, j) = s.h2.col(j);
    const Matrix& l = r.faults[0].signature;
    for (int i = 1; i <= ext; ++i)
      for (int j = 1; j <= ext; ++j) {
        const Vector ph = x.at(i - 1, j), pv = x.at(i, j - 1);
        Vector rr = r.a11 * ph.head(nr) + r.a12 * ph.tail(ns) + r.b11 * s.inputs.at(i - 1, j);
        Vector ss = r.a21 * pv.head(nr) + r.a22 * pv.tail(ns) + r.b21 * s.inputs.at(i, j - 1);
        rr += s.fault_value(0, i - 1, j) * l.topRows(nr).col(0);
        ss += s.fault_value(0, i, j - 1) * l.bottomRows(ns).col(0);
        x.at(i, j).head(nr) = rr;
        x.at(i, j).tail(ns) = ss;
      }
    CHECK(max_abs(x.data() - g.states.data()) < 1e-12);
  }
}

TEST_CASE("validate diagnostics") {
  CHECK(validate(heat_exchanger(Measurement::full)).empty());
  CHECK(validate(heat_exchanger(Measurement::partial)).empty());

  FmiiModel m = fixtures::counterexample();
  CHECK(validate(m).empty());
  FmiiModel bad_c = m;
  bad_c.output_map = Matrix::Zero(2, 3);
  CHECK(validate(bad_c).size() == 1);

  FmiiModel bad_k = m;
  bad_k.faults[0].maps.pop_back();
  CHECK(validate(bad_k).size() == 1);

  FmiiModel bad_a = m;
  bad_a.shift_ops[1] = Matrix::Zero(4, 3);
  CHECK_FALSE(validate(bad_a).empty());
  CHECK_THROWS_AS(require_valid(bad_a), DimensionError);

  FmiiModel four = m;
  for (int i = 0; i < 2; ++i) four.shift_ops.push_back(Matrix::Zero(4, 4));
  CHECK_FALSE(validate(four).empty());
}

TEST_CASE("fault subspaces") {
  const FmiiModel m = heat_exchanger(Measurement::full);
  CHECK(m.fault_index("f2") == 1);
  CHECK(m.fault_index("nope") == -1);
  CHECK(m.fault_subspace(1).dim() == 1);
  CHECK(equals(m.other_faults_subspace(0), m.fault_subspace(1)));
}

TEST_CASE("filter validation") {
  const FmiiModel m = fixtures::counterexample();
  DetectionFilter f;
  f.F = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
  f.K = {Matrix::Zero(3, 0), Matrix::Zero(3, 0)};
  f.E = {Matrix::Zero(3, 2), Matrix::Zero(3, 2)};
  f.M = Matrix::Zero(1, 3);
  f.H = Matrix::Zero(1, 2);
  CHECK(validate(f, m).empty());
  f.E[1] = Matrix::Zero(3, 1);
  CHECK(validate(f, m).size() == 1);
}
