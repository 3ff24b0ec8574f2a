#include "govern/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

namespace govern {

NominalTrajectory nominal_rollout(const PlantModel& plant, const StateVector& x0,
                                  const CommandSequence& V) {
  if (x0.size() != plant.state_dim()) {
    throw std::invalid_argument("nominal_rollout: x0 dimension mismatch");
  }
  const int N = static_cast<int>(V.size()) - 1;
  if (N < 0) throw std::invalid_argument("nominal_rollout: empty command sequence");

  NominalTrajectory nom;
  nom.x.resize(N + 1, plant.state_dim());
  nom.y.resize(N + 1, plant.output_dim());

  StateVector x = x0;
  for (int j = 0; j <= N; ++j) {
    nom.x.row(j) = x.transpose();
    nom.y.row(j) = plant.output(x, V[j]).transpose();
    if (j < N) x = plant.step(x, V[j]);
  }
  return nom;
}

SensitivityBundle propagate_sensitivities(const PlantModel& plant,
                                          const NominalTrajectory& nom,
                                          const CommandSequence& V) {
  const int N = nom.horizon();
  const int n_x = plant.state_dim();
  const int n_y = plant.output_dim();
  if (static_cast<int>(V.size()) != N + 1) {
    throw std::invalid_argument("propagate_sensitivities: V length != horizon+1");
  }
  if (nom.x.cols() != n_x || nom.y.cols() != n_y) {
    throw std::invalid_argument("propagate_sensitivities: trajectory/plant dimension mismatch");
  }

  SensitivityBundle b;
  b.x_nom = nom.x;
  b.y_nom = nom.y;
  b.S_x.assign(N + 1, Eigen::MatrixXd::Zero(n_x, N + 1));
  b.S_y.assign(n_y, Eigen::MatrixXd::Zero(N + 1, N + 1));

  for (int j = 0; j < N; ++j) {
    const StateVector xj = nom.x.row(j).transpose();
    const Eigen::MatrixXd A = plant.jac_f_x(xj, V[j]);
    const Eigen::VectorXd Bv = plant.jac_f_v(xj, V[j]);
    // columns k < j propagate; column k == j picks up the direct input term
    b.S_x[j + 1].leftCols(j + 1) = A * b.S_x[j].leftCols(j + 1);
    b.S_x[j + 1].col(j) += Bv;
  }

  for (int j = 0; j <= N; ++j) {
    const StateVector xj = nom.x.row(j).transpose();
    const Eigen::MatrixXd C = plant.jac_h_x(xj, V[j]);
    const Eigen::VectorXd Dv = plant.jac_h_v(xj, V[j]);
    const Eigen::MatrixXd Sy_j = C * b.S_x[j];  // n_y x (N+1)
    for (int i = 0; i < n_y; ++i) {
      b.S_y[i].row(j) = Sy_j.row(i);
      b.S_y[i](j, j) += Dv[i];
    }
  }
  return b;
}

double taylor_upper_bound(const SensitivityBundle& bundle, const RemainderBound& mbar,
                          const CommandSequence& V, const CommandSequence& V_nom, int j,
                          int output_index) {
  const int N = bundle.horizon();
  if (j < 0 || j > N) throw std::out_of_range("taylor_upper_bound: step index");
  if (output_index < 0 || output_index >= bundle.output_dim()) {
    throw std::out_of_range("taylor_upper_bound: output index");
  }
  if (V.size() != V_nom.size() || static_cast<int>(V.size()) != N + 1) {
    throw std::invalid_argument("taylor_upper_bound: sequence length mismatch");
  }

  const Eigen::VectorXd dv = (V - V_nom).head(j + 1);
  const double linear = bundle.S_y[output_index].row(j).head(j + 1).dot(dv);
  const double curv = 0.5 * mbar.mbar[output_index] * dv.squaredNorm();
  return bundle.y_nom(j, output_index) + linear + curv;
}

namespace {

// deterministic uniform draw in [0,1), stable across standard libraries
double u01(std::uint64_t& state) {
  // splitmix64
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace

RemainderBound estimate_curvature(const PlantModel& plant,
                                  const std::vector<StateVector>& sample_states,
                                  int horizon, int probes, double safety,
                                  std::uint64_t seed) {
  if (sample_states.empty()) {
    throw std::invalid_argument("estimate_curvature: no sample states");
  }
  const int n_y = plant.output_dim();
  const InputInterval box = plant.input_interval();
  const double h = 1e-3;

  Eigen::VectorXd worst = Eigen::VectorXd::Zero(n_y);
  std::uint64_t rng = seed;
  for (int p = 0; p < probes; ++p) {
    const auto& x0 = sample_states[static_cast<std::size_t>(
        u01(rng) * static_cast<double>(sample_states.size()))];
    CommandSequence V(horizon + 1);
    for (int k = 0; k <= horizon; ++k) {
      V[k] = box.lo + u01(rng) * (box.hi - box.lo);
    }
    const int k = static_cast<int>(u01(rng) * static_cast<double>(horizon + 1));

    CommandSequence Vp = V, Vm = V;
    Vp[k] += h;
    Vm[k] -= h;
    const Eigen::MatrixXd y0 = nominal_rollout(plant, x0, V).y;
    const Eigen::MatrixXd yp = nominal_rollout(plant, x0, Vp).y;
    const Eigen::MatrixXd ym = nominal_rollout(plant, x0, Vm).y;
    const Eigen::MatrixXd d2 = (yp - 2.0 * y0 + ym) / (h * h);
    for (int i = 0; i < n_y; ++i) {
      worst[i] = std::max(worst[i], d2.col(i).cwiseAbs().maxCoeff());
    }
  }
  return {safety * worst};
}

}  // namespace govern
