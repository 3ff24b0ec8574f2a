#pragma once

#include "govern/mcg.hpp"
#include "govern/nn.hpp"
#include "govern/optim.hpp"
#include "govern/sensitivity.hpp"

#include <string>
#include <vector>

namespace govern {

struct ReferenceProfile;  // sim module

/// Everything the online sensitivity-based strategy needs: the trained
/// approximator, the governor weights, and the calibrated curvature bound.
struct NnmcgConfig {
  GovernorWeights weights;
  RemainderBound mbar;
  FeedforwardNet net;
};

struct CalibrationReport {
  RemainderBound mbar_final;
  int iterations = 0;
  std::vector<double> max_violation_history;
  std::string profile_id;
  bool converged = false;
};

/// Tightened convex problem around the nominal sequence: decision
/// z = [v(0..N), eps_1..eps_ny], one quadratic constraint per output per step
///   y_nom[j][i] + sum_{k<=j} S_y(i,j,k)(v_k - v_nom_k)
///                + mbar_i/2 sum_{k<=j} (v_k - v_nom_k)^2 - eps_i <= 0,
/// objective identical to the exact governor's.
QcqpProblem build_tightened_qcqp(const SensitivityBundle& bundle, const RemainderBound& mbar,
                                 const CommandSequence& V_nom, double r,
                                 const GovernorWeights& weights, const InputInterval& box);

/// One online step: infer, saturate, roll out, propagate sensitivities, solve
/// the tightened problem, apply the first element. A failed solve is flagged
/// in the report; the caller decides the fallback (the simulation harness
/// holds the previously applied command).
GovernorDecision nnmcg_step(const PlantModel& plant, const NnmcgConfig& config,
                            const StateVector& x, double r, double tol = 1e-11);

/// Curvature-bound calibration: simulate the closed loop on the profile,
/// measure the worst constraint violation beyond the recorded slack, and
/// escalate the violating outputs' bounds geometrically until the violation
/// falls below viol_tol or the round cap is hit. Bounds at zero start from
/// seed_value on their first escalation.
CalibrationReport tune_mbar(const PlantModel& plant, const NnmcgConfig& config0,
                            const ReferenceProfile& profile, double viol_tol = 1e-6,
                            double increment_factor = 2.0, int max_rounds = 50,
                            double seed_value = 1e-3);

}  // namespace govern
