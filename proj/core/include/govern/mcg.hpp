#pragma once

#include "govern/optim.hpp"
#include "govern/sensitivity.hpp"

namespace govern {

/// Weights of the governor objective
///   sum_j (r - v(j))^2 + rho_s sum_{j<N} (v(j) - v(j+1))^2 + sum_i rho_i eps_i^2
/// over a horizon of N steps. rho_i falls back to rho for every output when
/// left empty.
struct GovernorWeights {
  double rho = 1e8;
  double rho_s = 1e4;
  int N = 11;
  Eigen::VectorXd rho_i;

  Eigen::VectorXd slack_weights(int n_y) const;
};

struct GovernorDecision {
  double v_applied = 0.0;
  CommandSequence V_star;
  Eigen::VectorXd eps_star;
  SolveReport solve;
};

/// Objective matrices over the stacked decision z = [v(0..N), eps_1..eps_ny]
/// (without the constant sum_j r^2 term), assembled tracking first, then
/// smoothing, then slack.
void governor_objective_matrices(const GovernorWeights& w, int n_y, double r,
                                 Eigen::MatrixXd& H, Eigen::VectorXd& g);

/// Full objective value including the constant term.
double governor_objective(const GovernorWeights& w, double r, const CommandSequence& V,
                          const Eigen::VectorXd& eps);

/// Shift the previous optimal sequence one step and hold the last entry.
/// An empty sequence comes back as a constant-r sequence of matching length
/// only when prev is sized; callers seed the first step with a constant
/// sequence themselves.
CommandSequence warm_shift(const CommandSequence& prev, double r);

/// One governor step: solve the finite-horizon problem with rollout
/// constraints y(j) <= eps (componentwise) from state x, apply the first
/// element. Constraint values come from nominal rollouts and their gradients
/// from the sensitivity recursion at each SQP iterate.
GovernorDecision mcg_step(const PlantModel& plant, const GovernorWeights& w,
                          const StateVector& x, double r, const CommandSequence& warm,
                          double tol = 1e-6, int max_iter = 100);

}  // namespace govern
