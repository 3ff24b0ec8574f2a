#pragma once

#include "govern/plant.hpp"

#include <cstdint>
#include <vector>

namespace govern {

/// Candidate command sequence [v(0), ..., v(N)] over a horizon of N steps.
using CommandSequence = Eigen::VectorXd;

/// States and outputs obtained by rolling the plant forward under a fixed
/// command sequence: x[j+1] = f(x[j], v[j]), y[j] = h(x[j], v[j]).
struct NominalTrajectory {
  Eigen::MatrixXd x;  // (N+1) x n_x
  Eigen::MatrixXd y;  // (N+1) x n_y
  int horizon() const { return static_cast<int>(x.rows()) - 1; }
};

/// Nominal trajectory plus first-order sensitivities of predicted states and
/// outputs with respect to each command in the sequence.
///
/// S_x[j] is n_x x (N+1); column k is d x(j) / d v(k), zero for k >= j.
/// S_y[i] is (N+1) x (N+1); entry (j,k) is d y_i(j) / d v(k), zero for k > j.
struct SensitivityBundle {
  Eigen::MatrixXd x_nom;  // (N+1) x n_x
  Eigen::MatrixXd y_nom;  // (N+1) x n_y
  std::vector<Eigen::MatrixXd> S_x;
  std::vector<Eigen::MatrixXd> S_y;

  int horizon() const { return static_cast<int>(x_nom.rows()) - 1; }
  int output_dim() const { return static_cast<int>(y_nom.cols()); }
};

/// Per-output bound on |d^2 y / d v^2| over the operating domain, used to
/// dominate the Taylor truncation error.
struct RemainderBound {
  Eigen::VectorXd mbar;

  static RemainderBound zero(int n_y) { return {Eigen::VectorXd::Zero(n_y)}; }
};

NominalTrajectory nominal_rollout(const PlantModel& plant, const StateVector& x0,
                                  const CommandSequence& V);

/// State recursion S_x(j+1,k) = df/dx(j) S_x(j,k) + [k==j] df/dv(j), S_x(0,k) = 0,
/// and output map S_y(j,k) = dh/dx(j) S_x(j,k) + [k==j] dh/dv(j), with all
/// Jacobians evaluated along the nominal trajectory.
SensitivityBundle propagate_sensitivities(const PlantModel& plant,
                                          const NominalTrajectory& nom,
                                          const CommandSequence& V);

/// First-order prediction of y_i(j) around V_nom plus the curvature term:
///   y_nom[j][i] + sum_{k<=j} S_y(i,j,k) (V[k]-V_nom[k])
///                + mbar[i]/2 * sum_{k<=j} (V[k]-V_nom[k])^2
double taylor_upper_bound(const SensitivityBundle& bundle, const RemainderBound& mbar,
                          const CommandSequence& V, const CommandSequence& V_nom, int j,
                          int output_index);

/// Sampled estimate of the per-output curvature bound: the largest absolute
/// second-order finite difference of any predicted output with respect to a
/// single command coordinate, over `probes` random (state, sequence, coordinate)
/// draws, scaled by `safety`. Probe draws are prefix-stable in `probes` for a
/// fixed seed.
RemainderBound estimate_curvature(const PlantModel& plant,
                                  const std::vector<StateVector>& sample_states,
                                  int horizon, int probes, double safety = 1.5,
                                  std::uint64_t seed = 0x5eed5eedULL);

}  // namespace govern
