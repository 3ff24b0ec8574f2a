#pragma once

#include "govern/mcg.hpp"
#include "govern/nn.hpp"
#include "govern/plant.hpp"
#include "govern/sensitivity.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace govern {

/// Piecewise-constant reference signal over a fixed number of steps.
/// Generated kinds materialize their breakpoints at construction, so `at` is
/// uniform and replay is deterministic.
struct ReferenceProfile {
  enum class Kind { steps, prbs_steps, drive_cycle_like };

  Kind kind = Kind::steps;
  std::vector<std::pair<int, double>> breakpoints;  // (step index, level), strictly increasing
  int total_steps = 0;
  std::uint64_t seed = 0;

  double at(int t) const;
  std::string id() const;
};

/// Explicit breakpoint profile.
ReferenceProfile make_profile(const std::vector<std::pair<int, double>>& breakpoints,
                              int total_steps);

/// Generated profiles. prbs_steps draws dwell times uniformly from 50..400
/// steps and levels uniformly over [min(levels), max(levels)];
/// drive_cycle_like uses shorter dwells (30..120) and a clipped random walk
/// over the same range. Deterministic given the seed.
ReferenceProfile make_profile(ReferenceProfile::Kind kind, std::uint64_t seed, int total_steps,
                              const std::vector<double>& levels);

enum class GovernorKind { none, naive_nn, mcg, nnmcg };

const char* to_string(GovernorKind k);
GovernorKind governor_kind_from_string(const std::string& s);

enum class StepStatus { ok, max_iter, numerical_failure, hold };

const char* to_string(StepStatus s);

struct TraceRow {
  int t = 0;
  StateVector x;
  double r = 0.0;
  double v = 0.0;
  OutputVector y;       // realized h(x(t), v(t))
  Eigen::VectorXd eps;  // recorded slack (zero for ungoverned methods)
  StepStatus status = StepStatus::ok;
  double wall_s = 0.0;  // governor computation only
};

struct SimulationTrace {
  std::vector<TraceRow> rows;
  std::string error;  // nonempty if the run aborted with a partial trace

  bool ok() const { return error.empty(); }
};

/// Which governor to run and everything it needs.
struct GovernorSetup {
  GovernorKind kind = GovernorKind::none;
  GovernorWeights weights;
  const FeedforwardNet* net = nullptr;  // naive_nn, nnmcg
  RemainderBound mbar;                  // nnmcg
  double nlp_tol = 1e-6;
  double qcqp_tol = 1e-11;
};

SimulationTrace run_closed_loop(const PlantModel& plant, const GovernorSetup& governor,
                                const ReferenceProfile& profile, const StateVector& x0);

// trace accounting
double max_violation(const SimulationTrace& trace);              // max over t,i of y_i(t)
double max_violation_beyond_slack(const SimulationTrace& trace); // max of y_i(t) - max(eps_i(t),0)
double max_recorded_slack(const SimulationTrace& trace);
double tracking_rmse(const SimulationTrace& a, const SimulationTrace& b);  // applied commands

struct BenchmarkEntry {
  std::string method;
  double average_step_time = 0.0;
  double worst_case_step_time = 0.0;
  bool constraint_satisfied = false;
  double max_violation = 0.0;
  double tracking_rmse_vs_mcg = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkEntry> entries;
  int repeats = 0;
  std::string profile_id;
};

/// Per-timestep minimum wall time across repeats, averaged / maximized as the
/// timing protocol prescribes. Tracking RMSE is measured against the MCG
/// entry's trace (NaN when no MCG method is among the setups).
BenchmarkReport benchmark(const PlantModel& plant, const std::vector<GovernorSetup>& setups,
                          const ReferenceProfile& profile, int repeats, const StateVector& x0,
                          double viol_tol = 1e-6);

/// (average, worst) of per-step minima; factored out so the aggregation rule
/// is testable on synthetic numbers.
std::pair<double, double> aggregate_times(const std::vector<std::vector<double>>& per_run_times);

// CSV export: header t,x0..x{nx-1},r,v,y0..y{ny-1},eps0..eps{ny-1},status,wall_s
void write_trace_csv(const SimulationTrace& trace, const std::string& path);
SimulationTrace read_trace_csv(const std::string& path);

std::string benchmark_report_json(const BenchmarkReport& report);

}  // namespace govern
