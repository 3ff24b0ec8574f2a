#include "govern/mcg.hpp"

#include <cmath>
#include <stdexcept>

namespace govern {

Eigen::VectorXd GovernorWeights::slack_weights(int n_y) const {
  if (rho_i.size() == 0) return Eigen::VectorXd::Constant(n_y, rho);
  if (static_cast<int>(rho_i.size()) != n_y) {
    throw std::invalid_argument("GovernorWeights: rho_i length != n_y");
  }
  return rho_i;
}

void governor_objective_matrices(const GovernorWeights& w, int n_y, double r,
                                 Eigen::MatrixXd& H, Eigen::VectorXd& g) {
  const int N = w.N;
  const int n = N + 1 + n_y;
  H.setZero(n, n);
  g.setZero(n);

  // tracking
  for (int j = 0; j <= N; ++j) {
    H(j, j) += 2.0;
    g[j] -= 2.0 * r;
  }
  // smoothing
  for (int j = 0; j < N; ++j) {
    H(j, j) += 2.0 * w.rho_s;
    H(j + 1, j + 1) += 2.0 * w.rho_s;
    H(j, j + 1) -= 2.0 * w.rho_s;
    H(j + 1, j) -= 2.0 * w.rho_s;
  }
  // slack
  const Eigen::VectorXd rho = w.slack_weights(n_y);
  for (int i = 0; i < n_y; ++i) {
    H(N + 1 + i, N + 1 + i) += 2.0 * rho[i];
  }
}

double governor_objective(const GovernorWeights& w, double r, const CommandSequence& V,
                          const Eigen::VectorXd& eps) {
  const int N = static_cast<int>(V.size()) - 1;
  double J = 0.0;
  for (int j = 0; j <= N; ++j) J += (r - V[j]) * (r - V[j]);
  for (int j = 0; j < N; ++j) J += w.rho_s * (V[j] - V[j + 1]) * (V[j] - V[j + 1]);
  const Eigen::VectorXd rho = w.slack_weights(static_cast<int>(eps.size()));
  for (Eigen::Index i = 0; i < eps.size(); ++i) J += rho[i] * eps[i] * eps[i];
  return J;
}

CommandSequence warm_shift(const CommandSequence& prev, double r) {
  if (prev.size() == 0) return CommandSequence::Constant(1, r);
  CommandSequence out(prev.size());
  out.head(prev.size() - 1) = prev.tail(prev.size() - 1);
  out[prev.size() - 1] = prev[prev.size() - 1];
  return out;
}

GovernorDecision mcg_step(const PlantModel& plant, const GovernorWeights& w,
                          const StateVector& x, double r, const CommandSequence& warm,
                          double tol, int max_iter) {
  const int N = w.N;
  const int n_y = plant.output_dim();
  const int nv = N + 1;
  const int n = nv + n_y;
  const InputInterval box = plant.input_interval();
  if (!std::isfinite(r)) throw std::invalid_argument("mcg_step: non-finite reference");

  Eigen::MatrixXd H_obj;
  Eigen::VectorXd g_obj;
  governor_objective_matrices(w, n_y, r, H_obj, g_obj);

  NlpProblem nlp;
  nlp.dim = n;
  nlp.n_constraints = n_y * (N + 1);
  nlp.lb = Eigen::VectorXd::Constant(n, 0.0);
  nlp.ub = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  nlp.lb.head(nv).setConstant(box.lo);
  nlp.ub.head(nv).setConstant(box.hi);
  nlp.hessian_seed = H_obj;

  nlp.objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad) *grad = H_obj * z + g_obj;
    return 0.5 * z.dot(H_obj * z) + g_obj.dot(z);
  };
  nlp.constraints = [&](const Eigen::VectorXd& z, Eigen::MatrixXd* jac) {
    const CommandSequence V = z.head(nv);
    const NominalTrajectory nom = nominal_rollout(plant, x, V);
    Eigen::VectorXd c(n_y * (N + 1));
    for (int j = 0; j <= N; ++j) {
      for (int i = 0; i < n_y; ++i) {
        c[j * n_y + i] = nom.y(j, i) - z[nv + i];
      }
    }
    if (jac) {
      const SensitivityBundle bundle = propagate_sensitivities(plant, nom, V);
      jac->setZero(n_y * (N + 1), n);
      for (int j = 0; j <= N; ++j) {
        for (int i = 0; i < n_y; ++i) {
          jac->row(j * n_y + i).head(nv) = bundle.S_y[i].row(j);
          (*jac)(j * n_y + i, nv + i) = -1.0;
        }
      }
    }
    return c;
  };

  // warm start: clamped sequence plus the slack needed to be feasible at it
  CommandSequence V0(nv);
  if (warm.size() == static_cast<Eigen::Index>(nv)) {
    for (int j = 0; j <= N; ++j) V0[j] = saturate(box, warm[j]);
  } else {
    V0.setConstant(saturate(box, r));
  }
  const NominalTrajectory nom0 = nominal_rollout(plant, x, V0);
  Eigen::VectorXd z0(n);
  z0.head(nv) = V0;
  for (int i = 0; i < n_y; ++i) {
    z0[nv + i] = std::max(0.0, nom0.y.col(i).maxCoeff());
  }

  GovernorDecision d;
  d.solve = solve_nlp(nlp, z0, tol, max_iter);
  d.V_star = d.solve.z_star.head(nv);
  d.eps_star = d.solve.z_star.tail(n_y);
  d.v_applied = saturate(box, d.V_star[0]);
  return d;
}

}  // namespace govern
