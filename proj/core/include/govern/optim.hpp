#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace govern {

enum class SolveStatus { optimal, max_iter, infeasible_numerics };

const char* to_string(SolveStatus s);

/// Result of a QP/QCQP/NLP solve. KKT residuals are measured on the scaled
/// system: stationarity and complementarity are divided by the objective data
/// magnitude (so a large slack penalty rho does not make the metric
/// unattainable), primal feasibility by the constraint data magnitude.
/// Dual variables are returned so the KKT conditions can be audited from the
/// raw problem data.
struct SolveReport {
  Eigen::VectorXd z_star;
  double objective = 0.0;     // 0.5 z'Hz + g'z at z_star
  double kkt_residual = 0.0;  // scaled, see above
  int iterations = 0;
  SolveStatus status = SolveStatus::infeasible_numerics;

  Eigen::VectorXd mult;               // one per listed constraint
  Eigen::VectorXd mult_lo, mult_hi;   // box bounds (0 where the bound is infinite)
};

/// min 0.5 z'Hz + g'z  s.t.  A z <= b,  lb <= z <= ub.
/// H symmetric PSD; A may have zero rows; +-infinity box entries allowed.
struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lb, ub;

  int dim() const { return static_cast<int>(g.size()); }
  int n_ineq() const { return static_cast<int>(b.size()); }
};

/// 0.5 z'Pz + q'z + c <= 0 with P PSD.
struct QuadraticConstraint {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double c = 0.0;
};

/// min 0.5 z'Hz + g'z  s.t.  quadratic constraints and lb <= z <= ub.
struct QcqpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  std::vector<QuadraticConstraint> constraints;
  Eigen::VectorXd lb, ub;

  int dim() const { return static_cast<int>(g.size()); }
  int n_ineq() const { return static_cast<int>(constraints.size()); }
};

/// min f(z)  s.t.  c(z) <= 0 componentwise, lb <= z <= ub.
/// Callbacks fill the gradient/Jacobian when the pointer is non-null.
struct NlpProblem {
  int dim = 0;
  int n_constraints = 0;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, Eigen::MatrixXd*)> constraints;
  Eigen::VectorXd lb, ub;
  Eigen::MatrixXd hessian_seed;  // optional initial Lagrangian-Hessian model; empty = identity
};

/// Dense primal-dual interior point method (Mehrotra predictor-corrector).
SolveReport solve_qp(const QuadraticProgram& p, std::optional<Eigen::VectorXd> warm = {},
                     double tol = 1e-8, int max_iter = 100);

/// Interior point method for convex QCQPs; constraint Jacobians and the
/// Lagrangian Hessian are re-evaluated at each iterate.
SolveReport solve_qcqp(const QcqpProblem& p, std::optional<Eigen::VectorXd> warm = {},
                       double tol = 1e-8, int max_iter = 100);

/// Single-shooting SQP: damped-BFGS model of the Lagrangian Hessian, QP
/// subproblems via solve_qp, line search on an l1 merit function.
SolveReport solve_nlp(const NlpProblem& p, const Eigen::VectorXd& warm, double tol = 1e-6,
                      int max_iter = 100);

/// Independent KKT audits: recompute the scaled residual from the raw problem
/// data and the report's primal/dual variables.
double qp_kkt_residual(const QuadraticProgram& p, const SolveReport& r);
double qcqp_kkt_residual(const QcqpProblem& p, const SolveReport& r);
double nlp_kkt_residual(const NlpProblem& p, const SolveReport& r);

}  // namespace govern
