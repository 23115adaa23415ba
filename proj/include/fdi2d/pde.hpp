#pragma once

#include <string>
#include <vector>

#include "fdi2d/model.hpp"

namespace fdi2d {

// dx/dt = A1 dx/dz + A2 x + B u + sum_k L_k f_k  on [0, length]
struct HyperbolicPde {
  Matrix a1, a2, b;
  std::vector<FaultSignature> faults;  // one n x 1 map each
  double dz = 0.1, dt = 0.1;
  double length = 1.0;
};

// Upwind differences with x(i,j) = [x~((i-1)dz, j dt); x~(i dz, j dt)].
// Inputs and faults enter through the second shift slot. A non-empty
// `warnings` receives a note when dt/dz * |A1| > 1.
FmiiModel discretize(const HyperbolicPde& p, std::vector<std::string>* warnings = nullptr);

enum class Measurement { full, partial };

HyperbolicPde heat_exchanger_pde();
FmiiModel heat_exchanger(Measurement measurement);

// Spatial semi-discretization with N cells: one shift operator (the 1D model).
FmiiModel ode1d_model(int n_cells, double length = 1.0);

}  // namespace fdi2d
