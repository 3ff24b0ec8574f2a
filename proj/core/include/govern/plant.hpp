#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>

namespace govern {

using StateVector = Eigen::VectorXd;

// Constraint residuals; a state/command pair is admissible iff every entry <= 0.
using OutputVector = Eigen::VectorXd;

/// Thrown when dynamics or outputs stop being finite (the trajectory left the
/// admissible domain) or an equilibrium iteration fails to converge.
class PlantDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Admissible command interval [lo, hi].
struct InputInterval {
  double lo = -1.0;
  double hi = 1.0;
};

/// Clamp v into the interval.
double saturate(const InputInterval& interval, double v);

/// Per-state bounds used only for test sampling.
struct OperatingBox {
  StateVector lo;
  StateVector hi;
};

/// Discrete-time closed-loop plant: x+ = f(x, v), y = h(x, v) <= 0 (componentwise),
/// with analytic Jacobians of f and h. Implementations are immutable after
/// construction; all member functions are pure.
class PlantModel {
 public:
  virtual ~PlantModel() = default;

  virtual int state_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual InputInterval input_interval() const = 0;
  virtual OperatingBox operating_box() const = 0;

  virtual StateVector step(const StateVector& x, double v) const = 0;
  virtual OutputVector output(const StateVector& x, double v) const = 0;

  virtual Eigen::MatrixXd jac_f_x(const StateVector& x, double v) const = 0;  // n_x x n_x
  virtual Eigen::VectorXd jac_f_v(const StateVector& x, double v) const = 0;  // n_x
  virtual Eigen::MatrixXd jac_h_x(const StateVector& x, double v) const = 0;  // n_y x n_x
  virtual Eigen::VectorXd jac_h_v(const StateVector& x, double v) const = 0;  // n_y
};

/// x+ = A x + B v, y = C x + D v. Requires spectral radius of A < 1.
class LinearPlant final : public PlantModel {
 public:
  LinearPlant(Eigen::MatrixXd A, Eigen::VectorXd B, Eigen::MatrixXd C, Eigen::VectorXd D,
              InputInterval interval = {-3.0, 3.0});

  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int output_dim() const override { return static_cast<int>(C_.rows()); }
  InputInterval input_interval() const override { return interval_; }
  OperatingBox operating_box() const override;

  StateVector step(const StateVector& x, double v) const override;
  OutputVector output(const StateVector& x, double v) const override;
  Eigen::MatrixXd jac_f_x(const StateVector& x, double v) const override;
  Eigen::VectorXd jac_f_v(const StateVector& x, double v) const override;
  Eigen::MatrixXd jac_h_x(const StateVector& x, double v) const override;
  Eigen::VectorXd jac_h_v(const StateVector& x, double v) const override;

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::VectorXd& D() const { return D_; }

 private:
  Eigen::MatrixXd A_, C_;
  Eigen::VectorXd B_, D_;
  InputInterval interval_;
};

/// Damped pendulum under a commanded torque fraction:
///   x1+ = x1 + Ts x2
///   x2+ = x2 + Ts (-a sin x1 - b x2 + c v)
/// Single constrained output y = x1 - x1_max. The steady-state-admissible
/// command boundary is v = (a/c) sin(x1_max).
class PendulumPlant : public PlantModel {
 public:
  struct Params {
    double Ts = 0.05;
    double a = 4.0;
    double b = 1.5;
    double c = 1.0;
    double x1_max = 0.6;
    InputInterval interval{-3.0, 3.0};
  };

  PendulumPlant() : PendulumPlant(Params{}) {}
  explicit PendulumPlant(const Params& p);

  int state_dim() const override { return 2; }
  int output_dim() const override { return 1; }
  InputInterval input_interval() const override { return p_.interval; }
  OperatingBox operating_box() const override;

  StateVector step(const StateVector& x, double v) const override;
  OutputVector output(const StateVector& x, double v) const override;
  Eigen::MatrixXd jac_f_x(const StateVector& x, double v) const override;
  Eigen::VectorXd jac_f_v(const StateVector& x, double v) const override;
  Eigen::MatrixXd jac_h_x(const StateVector& x, double v) const override;
  Eigen::VectorXd jac_h_v(const StateVector& x, double v) const override;

  const Params& params() const { return p_; }

  /// v at which the equilibrium sits exactly on the output constraint.
  double admissible_boundary() const;

 protected:
  Params p_;
};

/// PendulumPlant with a second constrained output y2 = -x2 - x2_max
/// (bounds the downward angular rate).
class DualOutputPendulum final : public PendulumPlant {
 public:
  DualOutputPendulum() : DualOutputPendulum(Params{}, 1.0) {}
  DualOutputPendulum(const Params& p, double x2_max);

  int output_dim() const override { return 2; }
  OutputVector output(const StateVector& x, double v) const override;
  Eigen::MatrixXd jac_h_x(const StateVector& x, double v) const override;
  Eigen::VectorXd jac_h_v(const StateVector& x, double v) const override;

  double x2_max() const { return x2_max_; }

 private:
  double x2_max_;
};

/// Fixed point of step(., v), found by iterating from the zero state until the
/// sup-norm residual falls below tol. Throws PlantDomainError if the iteration
/// cap is exceeded.
StateVector equilibrium(const PlantModel& plant, double v, double tol = 1e-10,
                        long max_steps = 1000000);

}  // namespace govern
