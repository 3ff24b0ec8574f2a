#include "govern/sim.hpp"

#include "govern/nnmcg.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace govern {

const char* to_string(GovernorKind k) {
  switch (k) {
    case GovernorKind::none: return "none";
    case GovernorKind::naive_nn: return "naive-nn";
    case GovernorKind::mcg: return "mcg";
    case GovernorKind::nnmcg: return "nn-mcg";
  }
  return "unknown";
}

GovernorKind governor_kind_from_string(const std::string& s) {
  if (s == "none") return GovernorKind::none;
  if (s == "naive-nn" || s == "naive_nn") return GovernorKind::naive_nn;
  if (s == "mcg") return GovernorKind::mcg;
  if (s == "nn-mcg" || s == "nnmcg") return GovernorKind::nnmcg;
  throw std::invalid_argument("unknown governor '" + s + "'");
}

const char* to_string(StepStatus s) {
  switch (s) {
    case StepStatus::ok: return "ok";
    case StepStatus::max_iter: return "max_iter";
    case StepStatus::numerical_failure: return "numfail";
    case StepStatus::hold: return "hold";
  }
  return "unknown";
}

namespace {

StepStatus from_solve_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return StepStatus::ok;
    case SolveStatus::max_iter: return StepStatus::max_iter;
    case SolveStatus::infeasible_numerics: return StepStatus::numerical_failure;
  }
  return StepStatus::numerical_failure;
}

// per-run governor state machine; one instance per simulation
class Driver {
 public:
  Driver(const PlantModel& plant, const GovernorSetup& setup)
      : plant_(plant), setup_(setup) {
    if ((setup.kind == GovernorKind::naive_nn || setup.kind == GovernorKind::nnmcg) &&
        setup.net == nullptr) {
      throw std::invalid_argument("run_closed_loop: governor needs a network");
    }
    if (setup.kind == GovernorKind::nnmcg &&
        setup.mbar.mbar.size() != plant.output_dim()) {
      throw std::invalid_argument("run_closed_loop: mbar length != plant outputs");
    }
  }

  // fills v/eps/status of the row
  void step(const StateVector& x, double r, TraceRow& row) {
    const int n_y = plant_.output_dim();
    const InputInterval box = plant_.input_interval();
    row.eps = Eigen::VectorXd::Zero(n_y);
    row.status = StepStatus::ok;

    switch (setup_.kind) {
      case GovernorKind::none:
        row.v = r;
        break;
      case GovernorKind::naive_nn: {
        const CommandSequence V = infer(*setup_.net, x, r);
        row.v = saturate(box, V[0]);
        break;
      }
      case GovernorKind::mcg: {
        if (warm_.size() == 0) {
          warm_ = CommandSequence::Constant(setup_.weights.N + 1, saturate(box, r));
        }
        const GovernorDecision d =
            mcg_step(plant_, setup_.weights, x, r, warm_, setup_.nlp_tol);
        row.v = d.v_applied;
        row.eps = d.eps_star;
        row.status = from_solve_status(d.solve.status);
        warm_ = warm_shift(d.V_star, r);
        break;
      }
      case GovernorKind::nnmcg: {
        NnmcgConfig cfg{setup_.weights, setup_.mbar, *setup_.net};
        const GovernorDecision d = nnmcg_step(plant_, cfg, x, r, setup_.qcqp_tol);
        if (d.solve.status == SolveStatus::infeasible_numerics) {
          // hold the previously applied command; logged distinctly
          row.v = have_last_ ? last_applied_ : saturate(box, r);
          row.status = StepStatus::hold;
        } else {
          row.v = d.v_applied;
          row.eps = d.eps_star;
          row.status = from_solve_status(d.solve.status);
        }
        break;
      }
    }
    last_applied_ = row.v;
    have_last_ = true;
  }

 private:
  const PlantModel& plant_;
  const GovernorSetup& setup_;
  CommandSequence warm_;
  double last_applied_ = 0.0;
  bool have_last_ = false;
};

}  // namespace

SimulationTrace run_closed_loop(const PlantModel& plant, const GovernorSetup& governor,
                                const ReferenceProfile& profile, const StateVector& x0) {
  SimulationTrace trace;
  trace.rows.reserve(profile.total_steps);
  Driver driver(plant, governor);

  StateVector x = x0;
  for (int t = 0; t < profile.total_steps; ++t) {
    TraceRow row;
    row.t = t;
    row.x = x;
    row.r = profile.at(t);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      driver.step(x, row.r, row);
      const auto t1 = std::chrono::steady_clock::now();
      row.wall_s = std::chrono::duration<double>(t1 - t0).count();
      row.y = plant.output(x, row.v);
      trace.rows.push_back(std::move(row));
      x = plant.step(x, row.v);
    } catch (const PlantDomainError& e) {
      trace.error = "step " + std::to_string(t) + ": " + e.what();
      return trace;
    }
  }
  return trace;
}

double max_violation(const SimulationTrace& trace) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) m = std::max(m, row.y.maxCoeff());
  return m;
}

double max_violation_beyond_slack(const SimulationTrace& trace) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& row : trace.rows) {
    for (Eigen::Index i = 0; i < row.y.size(); ++i) {
      m = std::max(m, row.y[i] - std::max(0.0, row.eps[i]));
    }
  }
  return m;
}

double max_recorded_slack(const SimulationTrace& trace) {
  double m = 0.0;
  for (const auto& row : trace.rows) {
    if (row.eps.size() > 0) m = std::max(m, row.eps.maxCoeff());
  }
  return m;
}

double tracking_rmse(const SimulationTrace& a, const SimulationTrace& b) {
  if (a.rows.size() != b.rows.size() || a.rows.empty()) {
    throw std::invalid_argument("tracking_rmse: trace lengths differ");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double d = a.rows[i].v - b.rows[i].v;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(a.rows.size()));
}

std::pair<double, double> aggregate_times(const std::vector<std::vector<double>>& per_run_times) {
  if (per_run_times.empty() || per_run_times.front().empty()) {
    throw std::invalid_argument("aggregate_times: no samples");
  }
  const std::size_t steps = per_run_times.front().size();
  double sum = 0.0, worst = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double best = per_run_times[0][t];
    for (const auto& run : per_run_times) {
      if (run.size() != steps) throw std::invalid_argument("aggregate_times: ragged runs");
      best = std::min(best, run[t]);
    }
    sum += best;
    worst = std::max(worst, best);
  }
  return {sum / static_cast<double>(steps), worst};
}

BenchmarkReport benchmark(const PlantModel& plant, const std::vector<GovernorSetup>& setups,
                          const ReferenceProfile& profile, int repeats, const StateVector& x0,
                          double viol_tol) {
  if (repeats < 1) throw std::invalid_argument("benchmark: repeats must be >= 1");
  BenchmarkReport report;
  report.repeats = repeats;
  report.profile_id = profile.id();

  std::vector<SimulationTrace> first_traces;
  const SimulationTrace* mcg_trace = nullptr;

  for (const auto& setup : setups) {
    std::vector<std::vector<double>> times;
    SimulationTrace first;
    for (int rep = 0; rep < repeats; ++rep) {
      SimulationTrace trace = run_closed_loop(plant, setup, profile, x0);
      if (!trace.ok()) {
        throw PlantDomainError("benchmark: run aborted: " + trace.error);
      }
      std::vector<double> t;
      t.reserve(trace.rows.size());
      for (const auto& row : trace.rows) t.push_back(row.wall_s);
      times.push_back(std::move(t));
      if (rep == 0) first = std::move(trace);
    }
    const auto [avg, worst] = aggregate_times(times);

    BenchmarkEntry entry;
    entry.method = to_string(setup.kind);
    entry.average_step_time = avg;
    entry.worst_case_step_time = worst;
    entry.max_violation = max_violation(first);
    entry.constraint_satisfied = max_violation_beyond_slack(first) <= viol_tol;
    report.entries.push_back(entry);
    first_traces.push_back(std::move(first));
  }

  for (std::size_t i = 0; i < setups.size(); ++i) {
    if (setups[i].kind == GovernorKind::mcg) {
      mcg_trace = &first_traces[i];
      break;
    }
  }
  for (std::size_t i = 0; i < setups.size(); ++i) {
    report.entries[i].tracking_rmse_vs_mcg =
        mcg_trace ? tracking_rmse(first_traces[i], *mcg_trace)
                  : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace govern
