#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdi2d/invariants.hpp"
#include "fdi2d/polymat.hpp"
#include "fdi2d/sim.hpp"

namespace fdi2d {

namespace fixtures {

// Four-state example whose faults are isolable geometrically although the
// polynomial (PBH-based) conditions fail.
FmiiModel counterexample();
FriendMaps counterexample_printed_friends();
// N(z1, z2) exactly as printed, and with the sign of f corrected (f = z1 + z2 - 2).
BivarPolyMatrix counterexample_printed_annihilator();
BivarPolyMatrix counterexample_corrected_annihilator();
std::vector<Matrix> counterexample_printed_quotient();

// A1 = A2 = 0.4 I, C = [1, -1]: f1 drives the state along ker C only.
FmiiModel remark_generic();

FriendMaps heat_exchanger_printed_friends();
std::vector<Matrix> heat_exchanger_printed_quotient();
Matrix heat_exchanger_printed_output();
std::vector<Matrix> heat_exchanger_printed_lyapunov();
std::vector<Matrix> heat_exchanger_printed_observer_gains();
// Observer gains for the f2 quotient of the partial-measurement model in the
// basis P = [e1; e3; e4], M = [0, 0, 1]: det(I - z1 F1 - z2 F2) == 1.
std::vector<Matrix> heat_exchanger_partial_deadbeat_gains();

// Zero initial temperatures, unit-step inlet from j = 1 on, u(i,j) = u(0,j).
Scenario heat_exchanger_scenario(const FmiiModel& m, int extent, double noise_std);

}  // namespace fixtures

// Step fault of unit severity at row i, switched on for j >= j.
struct FaultOnset {
  int fault;
  int i;
  int j;
};

struct AlarmAudit {
  std::vector<double> thresholds;
  std::vector<long> alarms;     // per filter, nodes above threshold
  std::vector<long> misplaced;  // alarms where the filter's fault cannot act yet
  std::vector<bool> expected;   // filter's fault occurs in the scenario
  bool pass() const;
};

// Calibrates thresholds on fault-free runs, replays the faulty scenario with
// output noise and checks where each residual crosses its threshold. A fault
// switched on at (i0, j0) can only reach nodes with i >= i0 and j > j0.
AlarmAudit audit_scenario(const FmiiModel& m, const std::vector<DetectionFilter>& filters,
                          const std::vector<FaultOnset>& onsets, int extent, double noise_std, int runs,
                          std::uint64_t seed);

struct DemoCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<std::string> demo_names();
// Runs the named pipeline, logging progress to `log`; throws std::invalid_argument on an unknown name.
std::vector<DemoCheck> run_demo(const std::string& name, std::ostream& log);

}  // namespace fdi2d
