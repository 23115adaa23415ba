#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdi2d/model.hpp"

namespace fdi2d {

// Column-per-node storage over the rectangle [0..i_max] x [0..j_max].
class Plane {
 public:
  Plane() = default;
  Plane(int i_max, int j_max, int width);

  int i_max() const { return i_max_; }
  int j_max() const { return j_max_; }
  int width() const { return static_cast<int>(data_.rows()); }

  auto at(int i, int j) { return data_.col(index(i, j)); }
  auto at(int i, int j) const { return data_.col(index(i, j)); }
  const Matrix& data() const { return data_; }
  Matrix& data() { return data_; }

 private:
  int index(int i, int j) const { return i * (j_max_ + 1) + j; }
  int i_max_ = 0, j_max_ = 0;
  Matrix data_;
};

struct Grid2D {
  Plane states;
  Plane outputs;
};

enum class FaultShape { step, pulse };

// step: active for i in [i_min, i_max] and j >= j_min
// pulse: active only inside the box [i_min, i_max] x [j_min, j_max]
struct FaultEvent {
  int fault = 0;
  int i_min = 0, i_max = 0;
  int j_min = 0, j_max = 0;
  double severity = 1.0;
  FaultShape shape = FaultShape::step;

  bool active(int i, int j) const;
};

struct Scenario {
  int i_max = 0, j_max = 0;
  Matrix h1;      // n x (i_max + 1), x(i, 0)
  Matrix h2;      // n x (j_max + 1), x(0, j)
  Plane inputs;   // m per node; empty when the model has no inputs
  std::vector<FaultEvent> faults;
  double noise_std = 0.0;  // additive output noise

  double fault_value(int fault, int i, int j) const;
};

// Zero boundary, zero input, no faults.
Scenario quiet_scenario(const FmiiModel& m, int i_max, int j_max);
std::vector<std::string> validate(const Scenario& s, const FmiiModel& m);

enum class FillOrder { antidiagonal, row_major };

Grid2D simulate_plant(const FmiiModel& m, const Scenario& s, std::uint64_t seed = 0,
                      FillOrder order = FillOrder::antidiagonal);

struct FilterRun {
  Plane residuals;  // r = M w_hat - H y per node
  Plane estimates;  // w_hat
  std::vector<double> norms;  // per node, row-major in (i, j)

  double norm(int i, int j) const { return norms[static_cast<std::size_t>(i) * (residuals.j_max() + 1) + j]; }
};

// The filter starts from P h on the boundary when P is known, else from zero.
FilterRun simulate_filter(const DetectionFilter& f, const Plane& y, const Plane& u, const Scenario& s);

struct ThresholdSpec {
  int runs = 100;         // N0
  int horizon = -1;       // N1; nodes with i, j <= N1 (negative = whole grid)
  std::vector<double> thresholds;
};

// Fault-free Monte-Carlo runs with output noise and boundary data perturbed by the
// same standard deviation; thresholds are the largest residual norms seen.
ThresholdSpec threshold_mc(const FmiiModel& m, const std::vector<DetectionFilter>& filters,
                           const Scenario& base, ThresholdSpec spec, std::uint64_t seed);

using AlarmPlane = std::vector<std::vector<bool>>;  // [i][j]

std::vector<AlarmPlane> fdi_decide(const std::vector<FilterRun>& runs, const std::vector<double>& thresholds);

void write_residual_csv(std::ostream& os, const std::vector<FilterRun>& runs, const std::vector<AlarmPlane>& alarms);

}  // namespace fdi2d
