#include "govern/nnmcg.hpp"

#include "govern/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace govern {

QcqpProblem build_tightened_qcqp(const SensitivityBundle& bundle, const RemainderBound& mbar,
                                 const CommandSequence& V_nom, double r,
                                 const GovernorWeights& weights, const InputInterval& box) {
  const int N = bundle.horizon();
  const int n_y = bundle.output_dim();
  const int nv = N + 1;
  const int n = nv + n_y;
  if (weights.N != N) throw std::invalid_argument("build_tightened_qcqp: horizon mismatch");
  if (static_cast<int>(V_nom.size()) != nv) {
    throw std::invalid_argument("build_tightened_qcqp: V_nom length mismatch");
  }
  if (static_cast<int>(mbar.mbar.size()) != n_y) {
    throw std::invalid_argument("build_tightened_qcqp: mbar length mismatch");
  }

  QcqpProblem p;
  governor_objective_matrices(weights, n_y, r, p.H, p.g);
  p.lb = Eigen::VectorXd::Constant(n, 0.0);
  p.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  p.lb.head(nv).setConstant(box.lo);
  p.ub.head(nv).setConstant(box.hi);

  p.constraints.reserve(static_cast<std::size_t>(n_y) * (N + 1));
  for (int i = 0; i < n_y; ++i) {
    const double mi = mbar.mbar[i];
    for (int j = 0; j <= N; ++j) {
      QuadraticConstraint qc;
      qc.P = Eigen::MatrixXd::Zero(n, n);
      qc.q = Eigen::VectorXd::Zero(n);
      double c = bundle.y_nom(j, i);
      for (int k = 0; k <= j; ++k) {
        const double s = bundle.S_y[i](j, k);
        qc.P(k, k) = mi;
        qc.q[k] = s - mi * V_nom[k];
        c += -s * V_nom[k] + 0.5 * mi * V_nom[k] * V_nom[k];
      }
      qc.q[nv + i] = -1.0;
      qc.c = c;
      p.constraints.push_back(std::move(qc));
    }
  }
  return p;
}

GovernorDecision nnmcg_step(const PlantModel& plant, const NnmcgConfig& config,
                            const StateVector& x, double r, double tol) {
  if (!x.allFinite() || !std::isfinite(r)) {
    throw std::invalid_argument("nnmcg_step: non-finite input");
  }
  const int N = config.weights.N;
  const int nv = N + 1;
  const int n_y = plant.output_dim();
  const InputInterval box = plant.input_interval();

  CommandSequence V_nom = infer(config.net, x, r);
  if (static_cast<int>(V_nom.size()) != nv) {
    throw std::invalid_argument("nnmcg_step: net horizon does not match weights");
  }
  for (int k = 0; k < nv; ++k) V_nom[k] = saturate(box, V_nom[k]);

  const NominalTrajectory nom = nominal_rollout(plant, x, V_nom);
  const SensitivityBundle bundle = propagate_sensitivities(plant, nom, V_nom);
  const QcqpProblem qcqp =
      build_tightened_qcqp(bundle, config.mbar, V_nom, r, config.weights, box);

  // zero-deviation point: feasible by construction, a good warm start
  Eigen::VectorXd z0(nv + n_y);
  z0.head(nv) = V_nom;
  for (int i = 0; i < n_y; ++i) z0[nv + i] = std::max(0.0, nom.y.col(i).maxCoeff());

  GovernorDecision d;
  d.solve = solve_qcqp(qcqp, z0, tol, 100);
  d.V_star = d.solve.z_star.head(nv);
  d.eps_star = d.solve.z_star.tail(n_y);
  d.v_applied = saturate(box, d.V_star[0]);
  return d;
}

CalibrationReport tune_mbar(const PlantModel& plant, const NnmcgConfig& config0,
                            const ReferenceProfile& profile, double viol_tol,
                            double increment_factor, int max_rounds, double seed_value) {
  const int n_y = plant.output_dim();
  CalibrationReport report;
  report.profile_id = profile.id();

  NnmcgConfig config = config0;
  if (config.mbar.mbar.size() == 0) config.mbar = RemainderBound::zero(n_y);
  if (static_cast<int>(config.mbar.mbar.size()) != n_y) {
    throw std::invalid_argument("tune_mbar: mbar length mismatch");
  }

  const StateVector x0 = equilibrium(plant, saturate(plant.input_interval(), profile.at(0)));

  for (int round = 1; round <= max_rounds; ++round) {
    report.iterations = round;

    GovernorSetup setup;
    setup.kind = GovernorKind::nnmcg;
    setup.weights = config.weights;
    setup.net = &config.net;
    setup.mbar = config.mbar;
    const SimulationTrace trace = run_closed_loop(plant, setup, profile, x0);
    if (!trace.ok()) {
      throw PlantDomainError("tune_mbar: simulation aborted: " + trace.error);
    }

    // worst realized overshoot of each output beyond the slack the solver
    // already admitted to
    Eigen::VectorXd viol = Eigen::VectorXd::Constant(n_y, -std::numeric_limits<double>::infinity());
    for (const auto& row : trace.rows) {
      for (int i = 0; i < n_y; ++i) {
        viol[i] = std::max(viol[i], row.y[i] - std::max(0.0, row.eps[i]));
      }
    }
    report.max_violation_history.push_back(viol.maxCoeff());

    bool any = false;
    for (int i = 0; i < n_y; ++i) {
      if (viol[i] > viol_tol) {
        any = true;
        config.mbar.mbar[i] =
            config.mbar.mbar[i] == 0.0 ? seed_value : config.mbar.mbar[i] * increment_factor;
      }
    }
    if (!any) {
      report.converged = true;
      break;
    }
  }

  report.mbar_final = config.mbar;
  return report;
}

}  // namespace govern
