#pragma once

#include "govern/mcg.hpp"
#include "govern/plant.hpp"
#include "govern/sensitivity.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace govern {

struct ReferenceProfile;  // sim module

enum class Activation { tanh_fn, linear };

struct Layer {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  Activation act = Activation::linear;
};

/// Feedforward approximator of the governor law: maps the normalized stacked
/// input [x; r] through dense layers to a command sequence. Inputs are
/// normalized as (u - in_shift) / in_scale; raw network outputs are mapped
/// back through out = net * out_scale + out_shift.
struct FeedforwardNet {
  std::vector<Layer> layers;
  Eigen::VectorXd in_shift, in_scale;
  Eigen::VectorXd out_shift, out_scale;

  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().W.cols()); }
  int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().b.size()); }
};

struct DataRecord {
  StateVector x;
  double r = 0.0;
  CommandSequence V_star;
  bool ok = true;  // solver-clean label; flagged records are excluded from training
};

struct TrainingDataset {
  std::vector<DataRecord> records;

  int input_dim() const {
    return records.empty() ? 0 : static_cast<int>(records.front().x.size()) + 1;
  }
  int output_dim() const {
    return records.empty() ? 0 : static_cast<int>(records.front().V_star.size());
  }
};

struct TrainOptions {
  std::vector<int> hidden_sizes{10};
  int trials = 3;
  std::uint64_t seed = 1;
  int max_epochs = 5000;
  int patience = 50;
  double learning_rate = 0.01;
  double val_fraction = 0.15;
};

struct TrainReport {
  double final_rmse = 0.0;  // over the full dataset, command units
  double best_val_rmse = 0.0;
  int epochs = 0;
  int train_size = 0;
  int val_size = 0;
  std::uint64_t seed = 0;
  int hidden_size = 0;
  int discarded_trials = 0;
  std::vector<double> val_rmse_checkpoints;  // best-so-far values, non-increasing
};

/// Forward pass on the stacked input [x; r].
CommandSequence infer(const FeedforwardNet& net, const StateVector& x, double r);

/// Root-mean-square error over all output coordinates of all clean records.
double rmse(const FeedforwardNet& net, const TrainingDataset& dataset);

/// Train one network per (architecture, trial) pair with Adam and early
/// stopping on a validation split; returns the network with the best
/// validation RMSE.
std::pair<FeedforwardNet, TrainReport> train(const TrainingDataset& dataset,
                                             const TrainOptions& opts);

/// Run the exact governor closed loop over the profile and label every step
/// with its optimal sequence. Steps whose solve failed are kept but flagged.
TrainingDataset collect_dataset(const PlantModel& plant, const GovernorWeights& weights,
                                const ReferenceProfile& profile, const StateVector& x0,
                                double nlp_tol = 1e-6);

// --- serialization ---

/// JSON net file; weight round-trips are bit-exact.
void save_net(const FeedforwardNet& net, const std::string& path);
FeedforwardNet load_net(const std::string& path);

/// CSV with header x0..x{nx-1},r,v0..v{N}; one clean record per row,
/// 17 significant digits.
void save_dataset_csv(const TrainingDataset& dataset, const std::string& path);
TrainingDataset load_dataset_csv(const std::string& path);

}  // namespace govern
