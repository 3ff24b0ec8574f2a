#include "govern/plant.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace govern {

namespace {

void ensure_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw PlantDomainError(std::string(what) + ": non-finite result (left the plant domain)");
  }
}

}  // namespace

double saturate(const InputInterval& interval, double v) {
  return std::min(std::max(v, interval.lo), interval.hi);
}

LinearPlant::LinearPlant(Eigen::MatrixXd A, Eigen::VectorXd B, Eigen::MatrixXd C,
                         Eigen::VectorXd D, InputInterval interval)
    : A_(std::move(A)), C_(std::move(C)), B_(std::move(B)), D_(std::move(D)),
      interval_(interval) {
  if (A_.rows() != A_.cols() || B_.size() != A_.rows() || C_.cols() != A_.rows() ||
      D_.size() != C_.rows()) {
    throw std::invalid_argument("LinearPlant: inconsistent dimensions");
  }
  const double sr = A_.eigenvalues().cwiseAbs().maxCoeff();
  if (!(sr < 1.0)) {
    throw std::invalid_argument("LinearPlant: spectral radius of A must be < 1");
  }
}

OperatingBox LinearPlant::operating_box() const {
  const int n = state_dim();
  // states stay near (I - A)^-1 B v for admissible v; a generous constant box works
  const double m = 10.0 * std::max(std::abs(interval_.lo), std::abs(interval_.hi));
  return {StateVector::Constant(n, -m), StateVector::Constant(n, m)};
}

StateVector LinearPlant::step(const StateVector& x, double v) const {
  StateVector next = A_ * x + B_ * v;
  ensure_finite(next, "LinearPlant::step");
  return next;
}

OutputVector LinearPlant::output(const StateVector& x, double v) const {
  OutputVector y = C_ * x + D_ * v;
  ensure_finite(y, "LinearPlant::output");
  return y;
}

Eigen::MatrixXd LinearPlant::jac_f_x(const StateVector&, double) const { return A_; }
Eigen::VectorXd LinearPlant::jac_f_v(const StateVector&, double) const { return B_; }
Eigen::MatrixXd LinearPlant::jac_h_x(const StateVector&, double) const { return C_; }
Eigen::VectorXd LinearPlant::jac_h_v(const StateVector&, double) const { return D_; }

PendulumPlant::PendulumPlant(const Params& p) : p_(p) {
  if (p_.Ts <= 0 || p_.a <= 0 || p_.b <= 0) {
    throw std::invalid_argument("PendulumPlant: Ts, a, b must be positive");
  }
  if (!(p_.interval.lo < p_.interval.hi)) {
    throw std::invalid_argument("PendulumPlant: empty input interval");
  }
}

OperatingBox PendulumPlant::operating_box() const {
  StateVector lo(2), hi(2);
  lo << -1.0, -2.0;
  hi << 1.0, 2.0;
  return {lo, hi};
}

StateVector PendulumPlant::step(const StateVector& x, double v) const {
  StateVector next(2);
  next[0] = x[0] + p_.Ts * x[1];
  next[1] = x[1] + p_.Ts * (-p_.a * std::sin(x[0]) - p_.b * x[1] + p_.c * v);
  ensure_finite(next, "PendulumPlant::step");
  return next;
}

OutputVector PendulumPlant::output(const StateVector& x, double) const {
  OutputVector y(1);
  y[0] = x[0] - p_.x1_max;
  ensure_finite(y, "PendulumPlant::output");
  return y;
}

Eigen::MatrixXd PendulumPlant::jac_f_x(const StateVector& x, double) const {
  Eigen::MatrixXd J(2, 2);
  J << 1.0, p_.Ts,
      -p_.Ts * p_.a * std::cos(x[0]), 1.0 - p_.Ts * p_.b;
  return J;
}

Eigen::VectorXd PendulumPlant::jac_f_v(const StateVector&, double) const {
  Eigen::VectorXd J(2);
  J << 0.0, p_.Ts * p_.c;
  return J;
}

Eigen::MatrixXd PendulumPlant::jac_h_x(const StateVector&, double) const {
  Eigen::MatrixXd J(1, 2);
  J << 1.0, 0.0;
  return J;
}

Eigen::VectorXd PendulumPlant::jac_h_v(const StateVector&, double) const {
  return Eigen::VectorXd::Zero(1);
}

double PendulumPlant::admissible_boundary() const {
  return p_.a / p_.c * std::sin(p_.x1_max);
}

DualOutputPendulum::DualOutputPendulum(const Params& p, double x2_max)
    : PendulumPlant(p), x2_max_(x2_max) {}

OutputVector DualOutputPendulum::output(const StateVector& x, double) const {
  OutputVector y(2);
  y[0] = x[0] - p_.x1_max;
  y[1] = -x[1] - x2_max_;
  ensure_finite(y, "DualOutputPendulum::output");
  return y;
}

Eigen::MatrixXd DualOutputPendulum::jac_h_x(const StateVector&, double) const {
  Eigen::MatrixXd J(2, 2);
  J << 1.0, 0.0,
      0.0, -1.0;
  return J;
}

Eigen::VectorXd DualOutputPendulum::jac_h_v(const StateVector&, double) const {
  return Eigen::VectorXd::Zero(2);
}

StateVector equilibrium(const PlantModel& plant, double v, double tol, long max_steps) {
  StateVector x = StateVector::Zero(plant.state_dim());
  for (long k = 0; k < max_steps; ++k) {
    StateVector next = plant.step(x, v);
    if ((next - x).lpNorm<Eigen::Infinity>() <= tol) {
      return next;
    }
    x = std::move(next);
  }
  throw PlantDomainError("equilibrium: fixed-point iteration did not converge");
}

}  // namespace govern
