#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "fdi2d/pde.hpp"
#include "fdi2d/sim.hpp"
#include "fdi2d/synthesis.hpp"

using namespace fdi2d;
using testing_support::max_abs;

TEST_CASE("discretize substitutes the upwind formulas") {
  HyperbolicPde p;
  p.a1 = Matrix::Zero(2, 2);
  p.a2 = Matrix::Zero(2, 2);
  p.b = Matrix::Zero(2, 1);
  p.dz = p.dt = 1.0;
  const FmiiModel m = discretize(p);
  CHECK(m.shift_ops[1].bottomRightCorner(2, 2) == Matrix::Identity(2, 2));
  CHECK(m.shift_ops[0].topRightCorner(2, 2) == Matrix::Identity(2, 2));
  CHECK(max_abs(m.shift_ops[1].topRows(2)) == 0.0);

  const FmiiModel he = discretize(heat_exchanger_pde());
  Matrix a2(4, 4);
  a2 << 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, -0.1, 0.1, 0, 1, 0.1, -0.1;
  CHECK(max_abs(he.shift_ops[1] - a2) < 1e-15);

  p.dz = 0.0;
  CHECK_THROWS(discretize(p));
}

TEST_CASE("heat exchanger fixtures") {
  const FmiiModel full = heat_exchanger(Measurement::full);
  const FmiiModel part = heat_exchanger(Measurement::partial);
  CHECK(validate(full).empty());
  CHECK(validate(part).empty());
  Matrix b2(4, 2);
  b2 << 0, 0, 0, 0, 1.1, -0.1, -0.1, 1.1;
  CHECK(full.input_maps[1] == b2);
  Matrix l2(4, 1), l1p(4, 1), l1f(4, 1);
  l2 << 0, 0, -1, 1;
  l1p << 0, 1, 0, 0;
  l1f << 0, 0, 0, 1;
  CHECK(full.faults[1].maps[1] == l2);
  CHECK(full.faults[0].maps[1] == l1f);
  CHECK(part.faults[0].maps[1] == l1p);
  CHECK(part.faults[1].maps[1] == l2);
}

TEST_CASE("CFL warning") {
  HyperbolicPde p = heat_exchanger_pde();
  std::vector<std::string> w;
  discretize(p, &w);
  CHECK(w.empty());
  p.dt = 0.2;
  discretize(p, &w);
  CHECK(w.size() == 1);
}

TEST_CASE("1D approximate model") {
  const FmiiModel one = ode1d_model(1);
  CHECK(one.order() == 1);
  CHECK(one.state_dim() == 2);
  Matrix a1(2, 2);
  a1 << -2, 1, 1, -2;
  CHECK(max_abs(one.shift_ops[0] - a1) < 1e-15);

  const FmiiModel two = ode1d_model(2, 1.0);
  const Matrix& a = two.shift_ops[0];
  CHECK(a(0, 0) == doctest::Approx(-3.0));
  CHECK(a(3, 3) == doctest::Approx(-3.0));
  CHECK(a(2, 0) == doctest::Approx(-2.0));
  CHECK(a(0, 2) == 0.0);
  CHECK(validate(two).empty());
  CHECK(two.fault_count() == 4);
  CHECK_THROWS(ode1d_model(0));
}

TEST_CASE("2D partial model isolable, 1D model not") {
  CHECK(isolability(heat_exchanger(Measurement::partial)).all_isolable());
  const FmiiModel ode = ode1d_model(5);
  const IsolabilityReport r = isolability(ode);
  for (const auto& f : r.faults) CHECK_FALSE(f.isolable);
}

TEST_CASE("grid refinement converges") {
  // Smooth inlet data on the discretized heat exchanger; solutions at the
  // same physical point (z = 0.5, t = 0.5) approach the finest grid.
  auto solve = [](int level) {
    HyperbolicPde p = heat_exchanger_pde();
    const int cells = 10 << level;
    p.dz = 1.0 / cells;
    p.dt = p.dz;
    const FmiiModel m = discretize(p);
    Scenario s = quiet_scenario(m, cells, cells);
    // x(i,j) = [x~((i-1)dz, j dt); x~(i dz, j dt)]; inlet at z = 0, smooth initial profile
    auto profile = [](double z) { return std::sin(3.0 * z) + 1.0; };
    auto inlet = [](double t) { return 1.0 + 0.5 * t * t; };
    for (int i = 0; i <= cells; ++i) {
      const double z0 = (i - 1) * p.dz, z1 = i * p.dz;
      s.h1.col(i) << profile(z0), 2.0 * profile(z0), profile(z1), 2.0 * profile(z1);
    }
    for (int j = 1; j <= cells; ++j) {
      const double t = j * p.dt;
      s.h2.col(j) << inlet(t), 2.0 * inlet(t), inlet(t), 2.0 * inlet(t);
    }
    s.h2.col(0) = s.h1.col(0);
    const Grid2D g = simulate_plant(m, s);
    return Vector(g.states.at(cells / 2, cells / 2).tail(2));
  };
  const Vector ref = solve(5);
  double prev = 1e300;
  for (int level = 0; level < 3; ++level) {
    const double err = (solve(level) - ref).norm();
    CHECK(err < prev);
    prev = err;
  }
}
