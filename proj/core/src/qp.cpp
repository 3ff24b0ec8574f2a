#include "govern/optim.hpp"

#include <cmath>
#include <limits>

namespace govern {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible_numerics: return "infeasible_numerics";
  }
  return "unknown";
}

namespace detail {

double data_scale(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
  double s = 1.0;
  if (M.size() > 0) s = std::max(s, M.cwiseAbs().maxCoeff());
  if (v.size() > 0) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

// largest alpha in (0, 1] with v + alpha*dv >= (1 - tau)*v approx; classic
// fraction-to-boundary rule
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -tau * v[i] / dv[i]);
  }
  return alpha;
}

// Stack the listed rows with rows for every finite box bound so the core IPM
// only sees A z <= b. Remembers the layout to split duals afterwards.
struct RowStack {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<int> lo_row;  // per variable, row index or -1
  std::vector<int> hi_row;
  int n_listed = 0;

  RowStack(const Eigen::MatrixXd& A0, const Eigen::VectorXd& b0, const Eigen::VectorXd& lb,
           const Eigen::VectorXd& ub) {
    const int n = static_cast<int>(std::max(A0.cols(), std::max(lb.size(), ub.size())));
    n_listed = static_cast<int>(b0.size());
    lo_row.assign(n, -1);
    hi_row.assign(n, -1);
    int extra = 0;
    for (int i = 0; i < n; ++i) {
      if (lb.size() > 0 && std::isfinite(lb[i])) ++extra;
      if (ub.size() > 0 && std::isfinite(ub[i])) ++extra;
    }
    A.setZero(n_listed + extra, n);
    b.setZero(n_listed + extra);
    if (n_listed > 0) {
      A.topRows(n_listed) = A0;
      b.head(n_listed) = b0;
    }
    int r = n_listed;
    for (int i = 0; i < n; ++i) {
      if (lb.size() > 0 && std::isfinite(lb[i])) {
        A(r, i) = -1.0;
        b[r] = -lb[i];
        lo_row[i] = r++;
      }
      if (ub.size() > 0 && std::isfinite(ub[i])) {
        A(r, i) = 1.0;
        b[r] = ub[i];
        hi_row[i] = r++;
      }
    }
  }

  void split_duals(const Eigen::VectorXd& lam, SolveReport& rep) const {
    const int n = static_cast<int>(lo_row.size());
    rep.mult = lam.head(n_listed);
    rep.mult_lo = Eigen::VectorXd::Zero(n);
    rep.mult_hi = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (lo_row[i] >= 0) rep.mult_lo[i] = lam[lo_row[i]];
      if (hi_row[i] >= 0) rep.mult_hi[i] = lam[hi_row[i]];
    }
  }
};

Eigen::VectorXd clamp_to_box(Eigen::VectorXd z, const Eigen::VectorXd& lb,
                             const Eigen::VectorXd& ub) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (lb.size() > 0 && std::isfinite(lb[i])) z[i] = std::max(z[i], lb[i]);
    if (ub.size() > 0 && std::isfinite(ub[i])) z[i] = std::min(z[i], ub[i]);
  }
  return z;
}

}  // namespace detail

SolveReport solve_qp(const QuadraticProgram& p, std::optional<Eigen::VectorXd> warm,
                     double tol, int max_iter) {
  using namespace detail;
  const int n = p.dim();
  SolveReport rep;
  rep.mult_lo = Eigen::VectorXd::Zero(n);
  rep.mult_hi = Eigen::VectorXd::Zero(n);

  const double obj_scale = data_scale(p.H, p.g);

  RowStack rows(p.A, p.b, p.lb, p.ub);
  const int m = static_cast<int>(rows.b.size());
  const double con_scale = data_scale(rows.A, rows.b);

  Eigen::VectorXd z = warm ? clamp_to_box(*warm, p.lb, p.ub) : Eigen::VectorXd::Zero(n);
  if (warm && z.size() != n) throw std::invalid_argument("solve_qp: warm-start dimension");

  if (m == 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(p.H);
    if (ldlt.info() != Eigen::Success) {
      rep.z_star = z;
      rep.status = SolveStatus::infeasible_numerics;
      return rep;
    }
    rep.z_star = ldlt.solve(-p.g);
    rep.objective = 0.5 * rep.z_star.dot(p.H * rep.z_star) + p.g.dot(rep.z_star);
    rep.kkt_residual =
        (p.H * rep.z_star + p.g).lpNorm<Eigen::Infinity>() / obj_scale;
    rep.iterations = 1;
    rep.status = rep.kkt_residual <= tol ? SolveStatus::optimal : SolveStatus::infeasible_numerics;
    rep.mult = Eigen::VectorXd::Zero(0);
    return rep;
  }

  // interior starting point; warm starts get a much smaller slack/dual seed
  const double s_seed = warm ? 1e-3 * con_scale : con_scale;
  const double l_seed = (warm ? 1e-3 : 1.0) * obj_scale / con_scale;
  Eigen::VectorXd s(m), lam(m);
  {
    const Eigen::VectorXd resid = rows.b - rows.A * z;
    for (int i = 0; i < m; ++i) s[i] = std::max(resid[i], s_seed);
    lam.setConstant(l_seed);
  }

  const double reg = 1e-13 * obj_scale;
  Eigen::VectorXd best_z = z;
  double best_kkt = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_lam = lam;
  SolveStatus status = SolveStatus::max_iter;
  int iters = 0;

  for (int it = 0; it < max_iter; ++it) {
    iters = it;
    const Eigen::VectorXd r_d = p.H * z + p.g + rows.A.transpose() * lam;
    const Eigen::VectorXd r_p = rows.A * z + s - rows.b;
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

    Eigen::MatrixXd K = p.H;
    K.diagonal().array() += reg;
    const Eigen::ArrayXd w = lam.array() / s.array();
    K.noalias() += rows.A.transpose() * w.matrix().asDiagonal() * rows.A;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    if (ldlt.info() != Eigen::Success) {
      status = SolveStatus::infeasible_numerics;
      break;
    }

    auto newton = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& ds,
                      Eigen::VectorXd& dlam) {
      const Eigen::VectorXd t = (rc - lam.cwiseProduct(r_p)).cwiseQuotient(s);
      dz = ldlt.solve(-r_d + rows.A.transpose() * t);
      ds = -r_p - rows.A * dz;
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
  rep.kkt_residual = status == SolveStatus::optimal
                         ? std::max({(p.H * z + p.g + rows.A.transpose() * lam)
                                         .lpNorm<Eigen::Infinity>() / obj_scale,
                                     (rows.A * z + s - rows.b).lpNorm<Eigen::Infinity>() /
                                         con_scale,
                                     (lam.array() * s.array()).maxCoeff() / obj_scale})
                         : best_kkt;
  rep.iterations = iters;
  rep.status = status;
  rows.split_duals(lam, rep);
  return rep;
}

}  // namespace govern
