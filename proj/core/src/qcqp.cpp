#include "govern/optim.hpp"

#include <cmath>
#include <limits>

namespace govern {

namespace detail {
double data_scale(const Eigen::MatrixXd& M, const Eigen::VectorXd& v);
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau);
Eigen::VectorXd clamp_to_box(Eigen::VectorXd z, const Eigen::VectorXd& lb,
                             const Eigen::VectorXd& ub);
}  // namespace detail

namespace {

// flattened constraint set: listed quadratic rows followed by box rows
struct QcqpRows {
  const QcqpProblem& p;
  std::vector<int> lo_row, hi_row;
  int n_listed = 0;
  int m = 0;

  explicit QcqpRows(const QcqpProblem& prob) : p(prob) {
    const int n = p.dim();
    n_listed = p.n_ineq();
    lo_row.assign(n, -1);
    hi_row.assign(n, -1);
    m = n_listed;
    for (int i = 0; i < n; ++i) {
      if (p.lb.size() > 0 && std::isfinite(p.lb[i])) lo_row[i] = m++;
      if (p.ub.size() > 0 && std::isfinite(p.ub[i])) hi_row[i] = m++;
    }
  }

  // constraint values g_i(z) and Jacobian rows (P_i z + q_i)'
  void eval(const Eigen::VectorXd& z, Eigen::VectorXd& val, Eigen::MatrixXd& J) const {
    const int n = p.dim();
    val.resize(m);
    J.setZero(m, n);
    for (int i = 0; i < n_listed; ++i) {
      const auto& qc = p.constraints[i];
      const Eigen::VectorXd Pz = qc.P * z;
      val[i] = 0.5 * z.dot(Pz) + qc.q.dot(z) + qc.c;
      J.row(i) = (Pz + qc.q).transpose();
    }
    for (int i = 0; i < n; ++i) {
      if (lo_row[i] >= 0) {
        val[lo_row[i]] = p.lb[i] - z[i];
        J(lo_row[i], i) = -1.0;
      }
      if (hi_row[i] >= 0) {
        val[hi_row[i]] = z[i] - p.ub[i];
        J(hi_row[i], i) = 1.0;
      }
    }
  }

  // Hessian of the Lagrangian constraint part: sum lam_i P_i
  Eigen::MatrixXd curvature(const Eigen::VectorXd& lam) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p.dim(), p.dim());
    for (int i = 0; i < n_listed; ++i) {
      if (p.constraints[i].P.size() > 0) M.noalias() += lam[i] * p.constraints[i].P;
    }
    return M;
  }

  void split_duals(const Eigen::VectorXd& lam, SolveReport& rep) const {
    const int n = p.dim();
    rep.mult = lam.head(n_listed);
    rep.mult_lo = Eigen::VectorXd::Zero(n);
    rep.mult_hi = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (lo_row[i] >= 0) rep.mult_lo[i] = lam[lo_row[i]];
      if (hi_row[i] >= 0) rep.mult_hi[i] = lam[hi_row[i]];
    }
  }
};

}  // namespace

SolveReport solve_qcqp(const QcqpProblem& p, std::optional<Eigen::VectorXd> warm, double tol,
                       int max_iter) {
  using namespace detail;
  const int n = p.dim();
  for (const auto& qc : p.constraints) {
    if (qc.q.size() != n || (qc.P.size() > 0 && (qc.P.rows() != n || qc.P.cols() != n))) {
      throw std::invalid_argument("solve_qcqp: constraint dimension mismatch");
    }
  }

  SolveReport rep;
  const double obj_scale = data_scale(p.H, p.g);
  QcqpRows rows(p);
  const int m = rows.m;

  double con_scale = 1.0;
  for (const auto& qc : p.constraints) {
    con_scale = std::max(con_scale, data_scale(qc.P, qc.q));
    con_scale = std::max(con_scale, std::abs(qc.c));
  }
  for (Eigen::Index i = 0; i < p.lb.size(); ++i) {
    if (std::isfinite(p.lb[i])) con_scale = std::max(con_scale, std::abs(p.lb[i]));
  }
  for (Eigen::Index i = 0; i < p.ub.size(); ++i) {
    if (std::isfinite(p.ub[i])) con_scale = std::max(con_scale, std::abs(p.ub[i]));
  }

  Eigen::VectorXd z = warm ? clamp_to_box(*warm, p.lb, p.ub) : Eigen::VectorXd::Zero(n);
  if (z.size() != n) throw std::invalid_argument("solve_qcqp: warm-start dimension");

  if (m == 0) {
    QuadraticProgram qp{p.H, p.g, Eigen::MatrixXd(0, n), Eigen::VectorXd(0),
                        Eigen::VectorXd(), Eigen::VectorXd()};
    return solve_qp(qp, z, tol, max_iter);
  }

  Eigen::VectorXd val(m);
  Eigen::MatrixXd J(m, n);
  rows.eval(z, val, J);

  const double s_seed = warm ? 1e-3 * con_scale : con_scale;
  const double l_seed = (warm ? 1e-3 : 1.0) * obj_scale / con_scale;
  Eigen::VectorXd s(m), lam(m);
  for (int i = 0; i < m; ++i) s[i] = std::max(-val[i], s_seed);
  lam.setConstant(l_seed);

  const double reg = 1e-13 * obj_scale;
  Eigen::VectorXd best_z = z, best_lam = lam;
  double best_kkt = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::max_iter;
  int iters = 0;

  for (int it = 0; it < max_iter; ++it) {
    iters = it;
    rows.eval(z, val, J);
    const Eigen::VectorXd r_d = p.H * z + p.g + J.transpose() * lam;
    const Eigen::VectorXd r_p = val + s;
    const double comp_max = (lam.array() * s.array()).maxCoeff();
    const double mu = lam.dot(s) / m;
    const double kkt = std::max({r_d.lpNorm<Eigen::Infinity>() / obj_scale,
                                 r_p.lpNorm<Eigen::Infinity>() / con_scale,
                                 comp_max / obj_scale});
    if (kkt < best_kkt) {
      best_kkt = kkt;
      best_z = z;
      best_lam = lam;
    }
    if (kkt <= tol) {
      status = SolveStatus::optimal;
      break;
    }

    Eigen::MatrixXd K = p.H + rows.curvature(lam);
    K.diagonal().array() += reg;
    const Eigen::ArrayXd w = lam.array() / s.array();
    K.noalias() += J.transpose() * w.matrix().asDiagonal() * J;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() != Eigen::Success) {
      status = SolveStatus::infeasible_numerics;
      break;
    }

    auto newton = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& ds,
                      Eigen::VectorXd& dlam) {
      const Eigen::VectorXd t = (rc - lam.cwiseProduct(r_p)).cwiseQuotient(s);
      dz = ldlt.solve(-r_d + J.transpose() * t);
      ds = -r_p - J * dz;
      dlam = (-rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Eigen::VectorXd dz_a, ds_a, dl_a;
    newton(lam.cwiseProduct(s), dz_a, ds_a, dl_a);
    const double ap_a = max_step(s, ds_a, 1.0);
    const double ad_a = max_step(lam, dl_a, 1.0);
    const double mu_aff = (s + ap_a * ds_a).dot(lam + ad_a * dl_a) / m;
    const double sigma = std::pow(std::min(1.0, std::max(0.0, mu_aff / mu)), 3);

    Eigen::VectorXd rc = lam.cwiseProduct(s) + ds_a.cwiseProduct(dl_a);
    rc.array() -= sigma * mu;
    Eigen::VectorXd dz, ds, dlam;
    newton(rc, dz, ds, dlam);
    if (!dz.allFinite() || !ds.allFinite() || !dlam.allFinite()) {
      status = SolveStatus::infeasible_numerics;
      break;
    }

    const double tau = (mu / obj_scale > 1e-8) ? 0.995 : 0.9995;
    const double ap = max_step(s, ds, tau);
    const double ad = max_step(lam, dlam, tau);
    z += ap * dz;
    s += ap * ds;
    lam += ad * dlam;
  }

  if (status != SolveStatus::optimal) {
    z = best_z;
    lam = best_lam;
  }
  rep.z_star = z;
  rep.objective = 0.5 * z.dot(p.H * z) + p.g.dot(z);
  rep.kkt_residual = best_kkt;
  if (status == SolveStatus::optimal) {
    rows.eval(z, val, J);
    rep.kkt_residual = std::max({(p.H * z + p.g + J.transpose() * lam)
                                     .lpNorm<Eigen::Infinity>() / obj_scale,
                                 (val + s).lpNorm<Eigen::Infinity>() / con_scale,
                                 (lam.array() * s.array()).maxCoeff() / obj_scale});
  }
  rep.iterations = iters;
  rep.status = status;
  rows.split_duals(lam, rep);
  return rep;
}

}  // namespace govern
