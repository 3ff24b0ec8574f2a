#include "govern/optim.hpp"

#include <cmath>

namespace govern {

namespace detail {
double data_scale(const Eigen::MatrixXd& M, const Eigen::VectorXd& v);
}

namespace {

// shared scaffolding: stationarity, feasibility, complementarity written out
// longhand from raw values so the audit does not reuse solver internals
struct Audit {
  double stat = 0.0, viol = 0.0, comp = 0.0, dual_neg = 0.0;
  double obj_scale = 1.0, con_scale = 1.0;

  double residual() const {
    return std::max({stat / obj_scale, viol / con_scale, comp / obj_scale, dual_neg});
  }
};

void audit_box(const Eigen::VectorXd& z, const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
               const Eigen::VectorXd& mlo, const Eigen::VectorXd& mhi, Audit& a) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (lb.size() > 0 && std::isfinite(lb[i])) {
      a.viol = std::max(a.viol, lb[i] - z[i]);
      a.comp = std::max(a.comp, std::abs(mlo[i] * (z[i] - lb[i])));
      a.dual_neg = std::max(a.dual_neg, -mlo[i]);
    }
    if (ub.size() > 0 && std::isfinite(ub[i])) {
      a.viol = std::max(a.viol, z[i] - ub[i]);
      a.comp = std::max(a.comp, std::abs(mhi[i] * (ub[i] - z[i])));
      a.dual_neg = std::max(a.dual_neg, -mhi[i]);
    }
  }
}

}  // namespace

double qp_kkt_residual(const QuadraticProgram& p, const SolveReport& r) {
  Audit a;
  a.obj_scale = detail::data_scale(p.H, p.g);
  a.con_scale = std::max(detail::data_scale(p.A, p.b), 1.0);

  Eigen::VectorXd stat = p.H * r.z_star + p.g - r.mult_lo + r.mult_hi;
  if (p.n_ineq() > 0) stat.noalias() += p.A.transpose() * r.mult;
  a.stat = stat.lpNorm<Eigen::Infinity>();

  if (p.n_ineq() > 0) {
    const Eigen::VectorXd cv = p.A * r.z_star - p.b;
    for (int i = 0; i < p.n_ineq(); ++i) {
      a.viol = std::max(a.viol, cv[i]);
      a.comp = std::max(a.comp, std::abs(r.mult[i] * cv[i]));
      a.dual_neg = std::max(a.dual_neg, -r.mult[i]);
    }
  }
  audit_box(r.z_star, p.lb, p.ub, r.mult_lo, r.mult_hi, a);
  return a.residual();
}

double qcqp_kkt_residual(const QcqpProblem& p, const SolveReport& r) {
  Audit a;
  a.obj_scale = detail::data_scale(p.H, p.g);
  for (const auto& qc : p.constraints) {
    a.con_scale = std::max(a.con_scale, detail::data_scale(qc.P, qc.q));
    a.con_scale = std::max(a.con_scale, std::abs(qc.c));
  }

  Eigen::VectorXd stat = p.H * r.z_star + p.g - r.mult_lo + r.mult_hi;
  for (int i = 0; i < p.n_ineq(); ++i) {
    const auto& qc = p.constraints[i];
    const Eigen::VectorXd gradc = qc.P * r.z_star + qc.q;
    stat.noalias() += r.mult[i] * gradc;
    const double cv = 0.5 * r.z_star.dot(qc.P * r.z_star) + qc.q.dot(r.z_star) + qc.c;
    a.viol = std::max(a.viol, cv);
    a.comp = std::max(a.comp, std::abs(r.mult[i] * cv));
    a.dual_neg = std::max(a.dual_neg, -r.mult[i]);
  }
  a.stat = stat.lpNorm<Eigen::Infinity>();
  audit_box(r.z_star, p.lb, p.ub, r.mult_lo, r.mult_hi, a);
  return a.residual();
}

double nlp_kkt_residual(const NlpProblem& p, const SolveReport& r) {
  Audit a;
  Eigen::VectorXd grad(p.dim);
  p.objective(r.z_star, &grad);
  a.obj_scale = std::max(1.0, grad.lpNorm<Eigen::Infinity>());

  Eigen::VectorXd stat = grad - r.mult_lo + r.mult_hi;
  if (p.n_constraints > 0) {
    Eigen::MatrixXd J(p.n_constraints, p.dim);
    const Eigen::VectorXd c = p.constraints(r.z_star, &J);
    stat.noalias() += J.transpose() * r.mult;
    for (int i = 0; i < p.n_constraints; ++i) {
      a.viol = std::max(a.viol, c[i]);
      a.comp = std::max(a.comp, std::abs(r.mult[i] * c[i]));
      a.dual_neg = std::max(a.dual_neg, -r.mult[i]);
    }
  }
  a.stat = stat.lpNorm<Eigen::Infinity>();
  audit_box(r.z_star, p.lb, p.ub, r.mult_lo, r.mult_hi, a);
  return a.residual();
}

}  // namespace govern
