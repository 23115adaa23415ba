// fdi2d: command-line front end.
//
// exit codes
//   0  success (analyze: every fault isolable; demo: every check passed)
//   1  parse, validation or usage error
//   2  fault not isolable
//   3  observer LMI infeasible
//   4  demo finished with failed checks

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fdi2d/demo.hpp"
#include "fdi2d/io.hpp"
#include "fdi2d/synthesis.hpp"

namespace {

using namespace fdi2d;
using io::json;

constexpr int kOk = 0, kInvalid = 1, kNotIsolable = 2, kInfeasible = 3, kChecksFailed = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

FmiiModel load_model(const std::string& path) {
  FmiiModel m = io::model_from_json(io::read_json_file(path));
  const auto d = validate(m);
  if (!d.empty()) {
    std::string msg = "invalid system '" + path + "':";
    for (const auto& x : d) msg += "\n  " + x;
    throw io::ParseError(msg);
  }
  return m;
}

std::vector<DetectionFilter> load_filters(const std::vector<std::string>& paths, const FmiiModel& m) {
  std::vector<DetectionFilter> out;
  for (const auto& p : paths) {
    DetectionFilter f = io::filter_from_json(io::read_json_file(p));
    const auto d = validate(f, m);
    if (!d.empty()) {
      std::string msg = "filter '" + p + "' does not fit the system:";
      for (const auto& x : d) msg += "\n  " + x;
      throw io::ParseError(msg);
    }
    out.push_back(std::move(f));
  }
  return out;
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << '\n';
  else
    io::write_json_file(out, j);
}

int cmd_analyze(const std::string& path) {
  const FmiiModel m = load_model(path);
  const IsolabilityReport r = isolability(m);
  const Subspace ns = invariant_unobservable(m);
  std::cout << "system: n = " << m.state_dim() << ", q = " << m.output_dim() << ", k = " << m.order()
            << ", faults = " << m.fault_count() << '\n';
  std::cout << "invariant unobservable subspace: dim " << ns.dim() << '\n';
  for (const auto& f : r.faults) {
    std::cout << f.name << ": " << (f.isolable ? "isolable" : "not isolable") << "  (dim W* = " << f.w_star.dim()
              << ", dim S* = " << f.s_star.dim() << "; " << f.reason << ")\n";
    if (f.isolable && !intersect(f.signature, ns).is_zero())
      std::cerr << "warning: " << f.name
                << " signature meets the invariant unobservable subspace; the condition holds generically but "
                   "this fault can leave y identically zero\n";
  }
  return r.all_isolable() ? kOk : kNotIsolable;
}

int cmd_synthesize(const std::string& path, const std::string& fault, const std::string& method,
                   const std::string& out) {
  const FmiiModel m = load_model(path);
  const int target = m.fault_index(fault);
  if (target < 0) throw UsageError("unknown fault '" + fault + "'");
  const SynthesisResult r = synthesize(m, target, method == "lmi" ? GainMethod::lmi : GainMethod::none);
  if (r.certificate) std::cerr << "certificate margin " << r.certificate->margin << '\n';
  emit(io::filter_to_json(r.filter), out);
  return kOk;
}

std::uint64_t pick_seed(std::optional<std::uint64_t> flag, const io::ScenarioDocument& doc) {
  if (flag) return *flag;
  return doc.seed.value_or(0);
}

int cmd_simulate(const std::string& path, const std::vector<std::string>& filter_paths, const std::string& scenario,
                 const std::string& thresholds, std::optional<std::uint64_t> seed, const std::string& out) {
  const FmiiModel m = load_model(path);
  const auto filters = load_filters(filter_paths, m);
  const io::ScenarioDocument doc = io::scenario_from_json(io::read_json_file(scenario), m);
  const auto d = validate(doc.scenario, m);
  if (!d.empty()) throw DimensionError("scenario: " + d.front());

  const Grid2D grid = simulate_plant(m, doc.scenario, pick_seed(seed, doc));
  std::vector<FilterRun> runs;
  for (const auto& f : filters) runs.push_back(simulate_filter(f, grid.outputs, doc.scenario.inputs, doc.scenario));

  std::vector<double> th(filters.size(), std::numeric_limits<double>::infinity());
  if (!thresholds.empty()) {
    th = io::thresholds_from_json(io::read_json_file(thresholds)).thresholds;
    if (th.size() != filters.size()) throw io::ParseError("thresholds: one value per filter is required");
  } else {
    std::cerr << "note: no thresholds given, alarm columns are zero\n";
  }
  const auto alarms = fdi_decide(runs, th);
  if (out.empty() || out == "-") {
    write_residual_csv(std::cout, runs, alarms);
  } else {
    std::ofstream os(out);
    if (!os) throw io::ParseError("cannot write '" + out + "'");
    write_residual_csv(os, runs, alarms);
  }
  return kOk;
}

int cmd_threshold(const std::string& path, const std::vector<std::string>& filter_paths, const std::string& scenario,
                  int runs, int horizon, std::optional<std::uint64_t> seed, const std::string& out) {
  const FmiiModel m = load_model(path);
  const auto filters = load_filters(filter_paths, m);
  const io::ScenarioDocument doc = io::scenario_from_json(io::read_json_file(scenario), m);
  const auto d = validate(doc.scenario, m);
  if (!d.empty()) throw DimensionError("scenario: " + d.front());
  ThresholdSpec spec;
  spec.runs = runs;
  spec.horizon = horizon;
  const std::uint64_t s = pick_seed(seed, doc);
  spec = threshold_mc(m, filters, doc.scenario, spec, s);
  std::vector<std::string> names;
  for (const auto& f : filters) names.push_back(f.fault);
  emit(io::thresholds_to_json(spec, names, s), out);
  return kOk;
}

int cmd_pbh(const std::string& path, const std::string& mode, std::optional<std::uint64_t> seed) {
  const FmiiModel m = load_model(path);
  if (m.order() != 2) throw UsageError("pbh needs a model with two shift operators");
  const auto v = zero_prime_check(pbh(m), mode == "monomic" ? PrimeMode::monomic : PrimeMode::zero_prime,
                                  seed.value_or(1), m.tol);
  json j{{"mode", mode}, {"prime", v.prime}, {"candidates_checked", v.candidates_checked}};
  if (v.witness) {
    j["witness"] = {{"z1", {v.witness->first.real(), v.witness->first.imag()}},
                    {"z2", {v.witness->second.real(), v.witness->second.imag()}}};
    j["witness_rank"] = v.witness_rank;
  }
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_demo(const std::string& name) {
  std::ostringstream log;
  const auto rows = run_demo(name, log);
  std::cerr << log.str();
  int failed = 0;
  for (const auto& r : rows) {
    std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  " << r.detail << '\n';
    failed += r.pass ? 0 : 1;
  }
  std::cout << rows.size() - failed << "/" << rows.size() << " checks passed\n";
  return failed == 0 ? kOk : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fault detection and isolation for 2D Fornasini-Marchesini systems"};
  app.require_subcommand(1);
  bool deterministic = false;
  std::optional<std::uint64_t> seed;
  app.add_flag("--deterministic", deterministic, "refuse to run stochastic commands without --seed");

  std::string system, fault, method = "lmi", scenario, thresholds, out, mode = "zero-prime", demo;
  std::vector<std::string> filters;
  int runs = 100, horizon = -1;

  auto* analyze = app.add_subcommand("analyze", "isolability report for every fault");
  analyze->add_option("system", system, "system JSON")->required();

  auto* synth = app.add_subcommand("synthesize", "build a detection filter for one fault");
  synth->add_option("system", system, "system JSON")->required();
  synth->add_option("--fault", fault, "target fault name")->required();
  synth->add_option("--method", method, "observer gains")->check(CLI::IsMember({"lmi", "none"}));
  synth->add_option("--out,-o", out, "filter JSON (default stdout)");

  auto* sim = app.add_subcommand("simulate", "simulate plant and filters, write residual CSV");
  sim->add_option("system", system, "system JSON")->required();
  sim->add_option("--filter", filters, "filter JSON, repeatable")->required();
  sim->add_option("--scenario", scenario, "scenario JSON")->required();
  sim->add_option("--thresholds", thresholds, "thresholds JSON");
  sim->add_option("--seed", seed, "noise seed");
  sim->add_option("--out,-o", out, "CSV (default stdout)");

  auto* thr = app.add_subcommand("threshold", "Monte-Carlo threshold calibration");
  thr->add_option("system", system, "system JSON")->required();
  thr->add_option("--filter", filters, "filter JSON, repeatable")->required();
  thr->add_option("--scenario", scenario, "fault-free base scenario JSON")->required();
  thr->add_option("--runs", runs, "number of runs")->check(CLI::PositiveNumber);
  thr->add_option("--horizon", horizon, "only nodes with i, j <= horizon");
  thr->add_option("--seed", seed, "seed");
  thr->add_option("--out,-o", out, "thresholds JSON (default stdout)");

  auto* pb = app.add_subcommand("pbh", "sampled zero/minor primeness test of the PBH matrix");
  pb->add_option("system", system, "system JSON")->required();
  pb->add_option("--mode", mode, "primeness notion")->check(CLI::IsMember({"zero-prime", "monomic"}));
  pb->add_option("--seed", seed, "sampling seed");

  auto* dm = app.add_subcommand("demo", "run a built-in example end to end");
  dm->add_option("name", demo, "example")->required()->check(CLI::IsMember(demo_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    const bool stochastic = sim->parsed() || thr->parsed() || pb->parsed();
    if (deterministic && stochastic && !seed) throw UsageError("--deterministic requires --seed");
    if (analyze->parsed()) return cmd_analyze(system);
    if (synth->parsed()) return cmd_synthesize(system, fault, method, out);
    if (sim->parsed()) return cmd_simulate(system, filters, scenario, thresholds, seed, out);
    if (thr->parsed()) return cmd_threshold(system, filters, scenario, runs, horizon, seed, out);
    if (pb->parsed()) return cmd_pbh(system, mode, seed);
    if (dm->parsed()) return cmd_demo(demo);
  } catch (const NotIsolable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotIsolable;
  } catch (const LmiInfeasible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
