#include "govern/optim.hpp"

#include <cmath>
#include <limits>

namespace govern {

namespace detail {
Eigen::VectorXd clamp_to_box(Eigen::VectorXd z, const Eigen::VectorXd& lb,
                             const Eigen::VectorXd& ub);
}

namespace {

double sum_violation(const Eigen::VectorXd& c) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) v += std::max(0.0, c[i]);
  return v;
}

}  // namespace

SolveReport solve_nlp(const NlpProblem& p, const Eigen::VectorXd& warm, double tol,
                      int max_iter) {
  const int n = p.dim;
  const int m = p.n_constraints;
  if (warm.size() != n) throw std::invalid_argument("solve_nlp: warm-start dimension");

  Eigen::VectorXd z = detail::clamp_to_box(warm, p.lb, p.ub);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd mu_lo = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu_hi = Eigen::VectorXd::Zero(n);

  Eigen::MatrixXd B;
  if (p.hessian_seed.size() > 0) {
    B = 0.5 * (p.hessian_seed + p.hessian_seed.transpose());
    B.diagonal().array() += 1e-10 * std::max(1.0, B.cwiseAbs().maxCoeff());
  } else {
    B = Eigen::MatrixXd::Identity(n, n);
  }

  Eigen::VectorXd grad(n);
  double f = p.objective(z, &grad);
  Eigen::VectorXd c(m);
  Eigen::MatrixXd J(m, n);
  if (m > 0) c = p.constraints(z, &J);

  double nu = 1.0;  // l1 merit penalty
  SolveStatus status = SolveStatus::max_iter;
  int iters = 0;
  int stalls = 0;

  // best-so-far by (near-feasibility, objective)
  Eigen::VectorXd best_z = z, best_lam = lam, best_mu_lo = mu_lo, best_mu_hi = mu_hi;
  double best_f = f, best_viol = m > 0 ? sum_violation(c) : 0.0;
  double kkt = std::numeric_limits<double>::infinity();

  auto kkt_residual = [&](const Eigen::VectorXd& zz, double /*ff*/, const Eigen::VectorXd& gg,
                          const Eigen::VectorXd& cc, const Eigen::MatrixXd& JJ,
                          const Eigen::VectorXd& l, const Eigen::VectorXd& mlo,
                          const Eigen::VectorXd& mhi) {
    const double obj_scale = std::max(1.0, gg.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd stat = gg - mlo + mhi;
    if (m > 0) stat.noalias() += JJ.transpose() * l;
    double viol = 0.0;
    for (Eigen::Index i = 0; i < cc.size(); ++i) viol = std::max(viol, cc[i]);
    double comp = 0.0;
    for (Eigen::Index i = 0; i < cc.size(); ++i) comp = std::max(comp, std::abs(l[i] * cc[i]));
    for (int i = 0; i < n; ++i) {
      if (p.lb.size() > 0 && std::isfinite(p.lb[i]))
        comp = std::max(comp, std::abs(mlo[i] * (zz[i] - p.lb[i])));
      if (p.ub.size() > 0 && std::isfinite(p.ub[i]))
        comp = std::max(comp, std::abs(mhi[i] * (p.ub[i] - zz[i])));
    }
    return std::max({stat.lpNorm<Eigen::Infinity>() / obj_scale, viol, comp / obj_scale});
  };

  for (int it = 0; it < max_iter; ++it) {
    iters = it;
    kkt = kkt_residual(z, f, grad, c, J, lam, mu_lo, mu_hi);
    if (kkt <= tol) {
      status = SolveStatus::optimal;
      break;
    }

    // QP subproblem in the step d: linearized constraints, box shifted to d-space
    QuadraticProgram sub;
    sub.H = B;
    sub.g = grad;
    sub.A = m > 0 ? J : Eigen::MatrixXd(0, n);
    sub.b = m > 0 ? Eigen::VectorXd(-c) : Eigen::VectorXd(0);
    sub.lb = p.lb.size() > 0 ? Eigen::VectorXd(p.lb - z) : Eigen::VectorXd();
    sub.ub = p.ub.size() > 0 ? Eigen::VectorXd(p.ub - z) : Eigen::VectorXd();
    SolveReport qp = solve_qp(sub, Eigen::VectorXd::Zero(n), std::min(1e-10, 0.01 * tol), 100);

    if (qp.status == SolveStatus::infeasible_numerics) {
      // elastic relaxation: one extra variable t >= 0 softens the linearized rows
      const double elastic_w = 1e3 * std::max(1.0, grad.lpNorm<Eigen::Infinity>() +
                                                       (m > 0 ? lam.lpNorm<Eigen::Infinity>() : 0.0));
      QuadraticProgram el;
      el.H = Eigen::MatrixXd::Zero(n + 1, n + 1);
      el.H.topLeftCorner(n, n) = B;
      el.g.setZero(n + 1);
      el.g.head(n) = grad;
      el.g[n] = elastic_w;
      el.A = Eigen::MatrixXd::Zero(m, n + 1);
      if (m > 0) {
        el.A.leftCols(n) = J;
        el.A.col(n).setConstant(-1.0);
        el.b = -c;
      } else {
        el.b = Eigen::VectorXd(0);
      }
      el.lb = Eigen::VectorXd::Constant(n + 1, -std::numeric_limits<double>::infinity());
      el.ub = Eigen::VectorXd::Constant(n + 1, std::numeric_limits<double>::infinity());
      if (p.lb.size() > 0) el.lb.head(n) = p.lb - z;
      if (p.ub.size() > 0) el.ub.head(n) = p.ub - z;
      el.lb[n] = 0.0;
      SolveReport eq = solve_qp(el, Eigen::VectorXd::Zero(n + 1), 1e-8, 100);
      if (eq.status == SolveStatus::infeasible_numerics) {
        status = SolveStatus::infeasible_numerics;
        break;
      }
      qp = eq;
      qp.z_star.conservativeResize(n);
      qp.mult_lo.conservativeResize(n);
      qp.mult_hi.conservativeResize(n);
    }

    const Eigen::VectorXd d = qp.z_star.head(n);
    const Eigen::VectorXd lam_qp = m > 0 ? qp.mult : Eigen::VectorXd(0);

    if (d.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, z.lpNorm<Eigen::Infinity>())) {
      // no progress possible from here
      lam = lam_qp;
      mu_lo = qp.mult_lo;
      mu_hi = qp.mult_hi;
      kkt = kkt_residual(z, f, grad, c, J, lam, mu_lo, mu_hi);
      status = kkt <= tol ? SolveStatus::optimal : SolveStatus::max_iter;
      break;
    }

    if (m > 0) {
      nu = std::max(nu, 1.1 * lam_qp.lpNorm<Eigen::Infinity>() + 1e-6);
    }
    const double viol0 = m > 0 ? sum_violation(c) : 0.0;
    const double merit0 = f + nu * viol0;
    const double dderiv = grad.dot(d) - nu * viol0;

    double alpha = 1.0;
    double f_new = f;
    Eigen::VectorXd z_new = z, c_new = c;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      z_new = z + alpha * d;
      f_new = p.objective(z_new, nullptr);
      double viol_new = 0.0;
      if (m > 0) {
        c_new = p.constraints(z_new, nullptr);
        viol_new = sum_violation(c_new);
      }
      const double merit_new = f_new + nu * viol_new;
      if (std::isfinite(merit_new) &&
          merit_new <= merit0 + 1e-4 * alpha * std::min(dderiv, 0.0)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (++stalls >= 2) {
        status = SolveStatus::max_iter;
        break;
      }
      alpha = 1e-8;
      z_new = z + alpha * d;
      f_new = p.objective(z_new, nullptr);
      if (m > 0) c_new = p.constraints(z_new, nullptr);
    } else {
      stalls = 0;
    }

    // gradients at the accepted point
    Eigen::VectorXd grad_new(n);
    f_new = p.objective(z_new, &grad_new);
    Eigen::MatrixXd J_new(m, n);
    if (m > 0) c_new = p.constraints(z_new, &J_new);

    // damped BFGS on the Lagrangian gradient difference
    const Eigen::VectorXd delta = z_new - z;
    Eigen::VectorXd gamma = grad_new - grad;
    if (m > 0) gamma.noalias() += (J_new - J).transpose() * lam_qp;
    const Eigen::VectorXd Bd = B * delta;
    const double dBd = delta.dot(Bd);
    double dg = delta.dot(gamma);
    if (dBd > 0.0) {
      if (dg < 0.2 * dBd) {
        const double theta = 0.8 * dBd / (dBd - dg);
        gamma = theta * gamma + (1.0 - theta) * Bd;
        dg = delta.dot(gamma);
      }
      if (dg > 1e-14 * dBd) {
        B.noalias() -= (Bd * Bd.transpose()) / dBd;
        B.noalias() += (gamma * gamma.transpose()) / dg;
      }
    }

    z = z_new;
    f = f_new;
    grad = grad_new;
    if (m > 0) {
      c = c_new;
      J = J_new;
    }
    lam = lam_qp;
    mu_lo = qp.mult_lo;
    mu_hi = qp.mult_hi;

    const double viol_now = m > 0 ? sum_violation(c) : 0.0;
    if (std::make_pair(viol_now > 1e-8, f) < std::make_pair(best_viol > 1e-8, best_f)) {
      best_z = z;
      best_f = f;
      best_viol = viol_now;
      best_lam = lam;
      best_mu_lo = mu_lo;
      best_mu_hi = mu_hi;
    }
  }

  SolveReport rep;
  if (status == SolveStatus::optimal || status == SolveStatus::infeasible_numerics) {
    rep.z_star = z;
    rep.mult = lam;
    rep.mult_lo = mu_lo;
    rep.mult_hi = mu_hi;
    rep.objective = f;
    rep.kkt_residual = kkt;
  } else {
    rep.z_star = best_z;
    rep.mult = best_lam;
    rep.mult_lo = best_mu_lo;
    rep.mult_hi = best_mu_hi;
    rep.objective = best_f;
    Eigen::VectorXd g_best(n);
    const double f_best = p.objective(best_z, &g_best);
    Eigen::VectorXd c_best(m);
    Eigen::MatrixXd J_best(m, n);
    if (m > 0) c_best = p.constraints(best_z, &J_best);
    rep.objective = f_best;
    rep.kkt_residual = kkt_residual(best_z, f_best, g_best, c_best, J_best, best_lam,
                                    best_mu_lo, best_mu_hi);
  }
  rep.iterations = iters;
  rep.status = status;
  return rep;
}

}  // namespace govern
