#include "fdi2d/pde.hpp"

#include <sstream>

namespace fdi2d {

FmiiModel discretize(const HyperbolicPde& p, std::vector<std::string>* warnings) {
  const auto n = p.a1.rows();
  if (p.a1.cols() != n || p.a2.rows() != n || p.a2.cols() != n || (p.b.size() != 0 && p.b.rows() != n))
    throw DimensionError("discretize: PDE coefficient shapes do not conform");
  if (!(p.dz > 0.0) || !(p.dt > 0.0)) throw std::invalid_argument("discretize: step sizes must be positive");
  const double ratio = p.dt / p.dz;
  if (warnings) {
    Eigen::JacobiSVD<Matrix> svd(p.a1);
    const double norm = n > 0 ? svd.singularValues()(0) : 0.0;
    if (ratio * norm > 1.0) {
      std::ostringstream os;
      os << "dt/dz * |A1| = " << ratio * norm << " exceeds 1; the upwind scheme may be unstable";
      warnings->push_back(os.str());
    }
  }
  const Matrix eye = Matrix::Identity(n, n);
  Matrix a1 = Matrix::Zero(2 * n, 2 * n), a2 = Matrix::Zero(2 * n, 2 * n);
  a1.topRightCorner(n, n) = eye;
  a2.bottomLeftCorner(n, n) = -ratio * p.a1;
  a2.bottomRightCorner(n, n) = eye + ratio * p.a1 + p.dt * p.a2;

  const auto m = p.b.cols();
  Matrix b2 = Matrix::Zero(2 * n, m);
  if (m > 0) b2.bottomRows(n) = p.b;

  FmiiModel model;
  model.shift_ops = {a1, a2};
  model.input_maps = {Matrix::Zero(2 * n, m), b2};
  model.output_map = Matrix::Zero(0, 2 * n);
  for (const auto& f : p.faults) {
    if (f.maps.size() != 1 || f.maps[0].rows() != n) throw DimensionError("discretize: fault '" + f.name + "' must be one n-row map");
    Matrix l2 = Matrix::Zero(2 * n, f.maps[0].cols());
    l2.bottomRows(n) = f.maps[0];
    model.faults.push_back({f.name, {Matrix::Zero(2 * n, f.maps[0].cols()), l2}});
  }
  return model;
}

HyperbolicPde heat_exchanger_pde() {
  HyperbolicPde p;
  p.a1 = -Matrix::Identity(2, 2);
  p.a2.resize(2, 2);
  p.a2 << -1, 1, 1, -1;
  p.b = Matrix::Zero(2, 0);
  p.dz = 0.1;
  p.dt = 0.1;
  return p;
}

FmiiModel heat_exchanger(Measurement measurement) {
  FmiiModel m = discretize(heat_exchanger_pde());
  // inlet temperatures enter as a distributed input, u(i,j) = u(0,j)
  Matrix b2 = Matrix::Zero(4, 2);
  b2.bottomRows(2) << 1.1, -0.1, -0.1, 1.1;
  m.input_maps = {Matrix::Zero(4, 2), b2};

  Matrix l1(4, 1), l2(4, 1);
  l2 << 0, 0, -1, 1;
  m.output_map.resize(2, 4);
  if (measurement == Measurement::full) {
    l1 << 0, 0, 0, 1;
    m.output_map << 1, 0, 0, 0, 0, 0, 0, 1;
  } else {
    l1 << 0, 1, 0, 0;
    m.output_map << 0, 1, 0, 0, 0, 0, 0, 1;
  }
  const Matrix zero = Matrix::Zero(4, 1);
  m.faults = {{"f1", {zero, l1}}, {"f2", {zero, l2}}};
  return m;
}

FmiiModel ode1d_model(int n_cells, double length) {
  if (n_cells < 1) throw std::invalid_argument("ode1d_model: need at least one cell");
  if (!(length > 0.0)) throw std::invalid_argument("ode1d_model: length must be positive");
  const int n = 2 * n_cells;
  const double dz = length / n_cells;
  const double d = -(1.0 + dz) / dz;
  Matrix a = Matrix::Zero(n, n);
  for (int k = 0; k < n_cells; ++k) {
    a.block(2 * k, 2 * k, 2, 2) << d, 1, 1, d;
    if (k > 0) a.block(2 * k, 2 * k - 2, 2, 2) = -(1.0 / dz) * Matrix::Identity(2, 2);
  }
  FmiiModel m;
  m.shift_ops = {a};
  Matrix b = Matrix::Zero(n, 2);
  b(0, 0) = 1.0;
  b(1, 1) = 1.0;
  m.input_maps = {b};
  m.output_map = Matrix::Zero(n_cells, n);
  for (int k = 0; k < n_cells; ++k) m.output_map(k, 2 * k) = 1.0;
  for (int k = 0; k < n_cells; ++k) {
    Matrix l1 = Matrix::Zero(n, 1), l2 = Matrix::Zero(n, 1);
    l1(2 * k, 0) = -1.0;
    l1(2 * k + 1, 0) = 1.0;
    l2(2 * k + 1, 0) = 1.0;
    m.faults.push_back({"f1_" + std::to_string(k + 1), {l1}});
    m.faults.push_back({"f2_" + std::to_string(k + 1), {l2}});
  }
  return m;
}

}  // namespace fdi2d
