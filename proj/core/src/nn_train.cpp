#include "govern/nn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace govern {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double u01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Adam state per parameter matrix
struct AdamState {
  Eigen::MatrixXd mW, vW;
  Eigen::VectorXd mb, vb;
};

struct Trial {
  std::vector<Layer> layers;       // normalized-space net
  std::vector<AdamState> adam;
};

Trial init_trial(int din, int hidden, int dout, std::uint64_t seed) {
  Trial t;
  auto make_layer = [&](int rows, int cols, Activation act) {
    Layer l;
    const double s = std::sqrt(6.0 / (rows + cols));
    l.W.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) l.W(i, j) = (2.0 * u01(seed) - 1.0) * s;
    l.b = Eigen::VectorXd::Zero(rows);
    l.act = act;
    return l;
  };
  t.layers.push_back(make_layer(hidden, din, Activation::tanh_fn));
  t.layers.push_back(make_layer(dout, hidden, Activation::linear));
  for (const auto& l : t.layers) {
    t.adam.push_back({Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()),
                      Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()),
                      Eigen::VectorXd::Zero(l.b.size()), Eigen::VectorXd::Zero(l.b.size())});
  }
  return t;
}

// forward pass on a batch (rows = samples); returns activations per layer
std::vector<Eigen::MatrixXd> forward(const std::vector<Layer>& layers,
                                     const Eigen::MatrixXd& X) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(X);
  for (const auto& l : layers) {
    Eigen::MatrixXd Z = (acts.back() * l.W.transpose()).rowwise() + l.b.transpose();
    if (l.act == Activation::tanh_fn) Z = Z.array().tanh().matrix();
    acts.push_back(std::move(Z));
  }
  return acts;
}

}  // namespace

std::pair<FeedforwardNet, TrainReport> train(const TrainingDataset& dataset,
                                             const TrainOptions& opts) {
  std::vector<const DataRecord*> clean;
  for (const auto& r : dataset.records) {
    if (r.ok) clean.push_back(&r);
  }
  const int B = static_cast<int>(clean.size());
  if (B < 2) throw std::invalid_argument("train: need at least 2 clean records");
  if (opts.hidden_sizes.empty()) throw std::invalid_argument("train: no architectures given");

  const int din = dataset.input_dim();
  const int dout = dataset.output_dim();

  Eigen::MatrixXd X(B, din), Y(B, dout);
  for (int i = 0; i < B; ++i) {
    X.row(i).head(din - 1) = clean[i]->x.transpose();
    X(i, din - 1) = clean[i]->r;
    Y.row(i) = clean[i]->V_star.transpose();
  }

  // seeded Fisher-Yates split, shared by all trials
  std::vector<int> idx(B);
  for (int i = 0; i < B; ++i) idx[i] = i;
  std::uint64_t shuffle_seed = opts.seed ^ 0xa5a5a5a5ULL;
  for (int i = B - 1; i > 0; --i) {
    const int j = static_cast<int>(u01(shuffle_seed) * (i + 1));
    std::swap(idx[i], idx[j]);
  }
  const int n_val = std::max(1, static_cast<int>(std::lround(opts.val_fraction * B)));
  const int n_train = B - n_val;
  if (n_train < 1) throw std::invalid_argument("train: validation split leaves no data");

  Eigen::MatrixXd Xtr(n_train, din), Ytr(n_train, dout), Xva(n_val, din), Yva(n_val, dout);
  for (int i = 0; i < n_train; ++i) {
    Xtr.row(i) = X.row(idx[i]);
    Ytr.row(i) = Y.row(idx[i]);
  }
  for (int i = 0; i < n_val; ++i) {
    Xva.row(i) = X.row(idx[n_train + i]);
    Yva.row(i) = Y.row(idx[n_train + i]);
  }

  // normalization fit on the training split only
  auto fit_norm = [](const Eigen::MatrixXd& M, Eigen::VectorXd& shift, Eigen::VectorXd& scale) {
    shift = M.colwise().mean();
    scale.resize(M.cols());
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      const double var = (M.col(c).array() - shift[c]).square().mean();
      scale[c] = std::max(std::sqrt(var), 1e-9);
    }
  };
  Eigen::VectorXd in_shift, in_scale, out_shift, out_scale;
  fit_norm(Xtr, in_shift, in_scale);
  fit_norm(Ytr, out_shift, out_scale);

  auto normalize_in = [&](const Eigen::MatrixXd& M) {
    return Eigen::MatrixXd(((M.rowwise() - in_shift.transpose()).array().rowwise() /
                            in_scale.transpose().array())
                               .matrix());
  };
  const Eigen::MatrixXd Xtr_n = normalize_in(Xtr);
  const Eigen::MatrixXd Xva_n = normalize_in(Xva);

  auto denorm_rmse = [&](const std::vector<Layer>& layers, const Eigen::MatrixXd& Xn,
                         const Eigen::MatrixXd& Yref) {
    const Eigen::MatrixXd out = forward(layers, Xn).back();
    const Eigen::MatrixXd pred =
        (out.array().rowwise() * out_scale.transpose().array()).matrix().rowwise() +
        out_shift.transpose();
    return std::sqrt((pred - Yref).squaredNorm() /
                     static_cast<double>(Yref.rows() * Yref.cols()));
  };

  TrainReport report;
  report.seed = opts.seed;
  report.train_size = n_train;
  report.val_size = n_val;

  std::vector<Layer> best_layers;
  double best_val = std::numeric_limits<double>::infinity();

  const double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;
  std::uint64_t arch_counter = 0;

  for (int hidden : opts.hidden_sizes) {
    ++arch_counter;
    for (int trial = 0; trial < opts.trials; ++trial) {
      std::uint64_t trial_seed = opts.seed;
      trial_seed = splitmix64(trial_seed) ^ (arch_counter * 1000003ULL + trial);
      Trial T = init_trial(din, hidden, dout, trial_seed);

      double trial_best_val = std::numeric_limits<double>::infinity();
      std::vector<Layer> trial_best_layers = T.layers;
      std::vector<double> checkpoints;
      int epochs_run = 0;
      int since_improve = 0;
      bool diverged = false;
      double lr = opts.learning_rate;
      int since_decay = 0;

      for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        epochs_run = epoch;
        auto acts = forward(T.layers, Xtr_n);
        const Eigen::MatrixXd& out = acts.back();
        // residual in command units, gradient chained through the output scale
        const Eigen::MatrixXd pred =
            (out.array().rowwise() * out_scale.transpose().array()).matrix().rowwise() +
            out_shift.transpose();
        const Eigen::MatrixXd R = pred - Ytr;
        const double loss = R.squaredNorm() / static_cast<double>(R.rows() * R.cols());
        if (!std::isfinite(loss)) {
          diverged = true;
          break;
        }

        Eigen::MatrixXd delta =
            (2.0 / static_cast<double>(R.rows() * R.cols())) *
            (R.array().rowwise() * out_scale.transpose().array()).matrix();
        const int t_adam = epoch;
        for (int l = static_cast<int>(T.layers.size()) - 1; l >= 0; --l) {
          Layer& L = T.layers[l];
          if (L.act == Activation::tanh_fn) {
            delta = delta.cwiseProduct((1.0 - acts[l + 1].array().square()).matrix());
          }
          const Eigen::MatrixXd gW = delta.transpose() * acts[l];
          const Eigen::VectorXd gb = delta.colwise().sum().transpose();
          Eigen::MatrixXd delta_prev;
          if (l > 0) delta_prev = delta * L.W;

          AdamState& A = T.adam[l];
          A.mW = b1 * A.mW + (1 - b1) * gW;
          A.vW = b2 * A.vW + (1 - b2) * gW.cwiseProduct(gW);
          A.mb = b1 * A.mb + (1 - b1) * gb;
          A.vb = b2 * A.vb + (1 - b2) * gb.cwiseProduct(gb);
          const double bc1 = 1.0 - std::pow(b1, t_adam);
          const double bc2 = 1.0 - std::pow(b2, t_adam);
          L.W -= (lr / bc1) * (A.mW.array() / ((A.vW.array() / bc2).sqrt() + adam_eps)).matrix();
          L.b -= (lr / bc1) * (A.mb.array() / ((A.vb.array() / bc2).sqrt() + adam_eps)).matrix();

          delta = std::move(delta_prev);
        }

        const double val = denorm_rmse(T.layers, Xva_n, Yva);
        if (val < trial_best_val) {
          trial_best_val = val;
          trial_best_layers = T.layers;
          checkpoints.push_back(val);
          since_improve = 0;
          since_decay = 0;
        } else {
          ++since_improve;
          ++since_decay;
          if (since_decay >= 25) {
            lr *= 0.5;  // plateau decay
            since_decay = 0;
          }
          if (since_improve >= opts.patience) break;
        }
      }

      if (diverged || !std::isfinite(trial_best_val)) {
        ++report.discarded_trials;
        continue;
      }
      if (trial_best_val < best_val) {
        best_val = trial_best_val;
        best_layers = trial_best_layers;
        report.hidden_size = hidden;
        report.epochs = epochs_run;
        report.val_rmse_checkpoints = checkpoints;
      }
    }
  }

  if (best_layers.empty()) {
    throw std::runtime_error("train: every trial diverged");
  }

  FeedforwardNet net;
  net.layers = best_layers;
  net.in_shift = in_shift;
  net.in_scale = in_scale;
  net.out_shift = out_shift;
  net.out_scale = out_scale;

  report.best_val_rmse = best_val;
  report.final_rmse = rmse(net, dataset);
  return {net, report};
}

}  // namespace govern
