#include "govern/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace govern {

namespace {

Eigen::VectorXd apply_activation(Eigen::VectorXd a, Activation act) {
  if (act == Activation::tanh_fn) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = std::tanh(a[i]);
  }
  return a;
}

}  // namespace

CommandSequence infer(const FeedforwardNet& net, const StateVector& x, double r) {
  const int din = net.input_dim();
  if (static_cast<int>(x.size()) + 1 != din) {
    throw std::invalid_argument("infer: input dimension mismatch");
  }
  Eigen::VectorXd u(din);
  u.head(x.size()) = x;
  u[din - 1] = r;
  if (net.in_shift.size() > 0) {
    u = (u - net.in_shift).cwiseQuotient(net.in_scale);
  }
  for (const auto& layer : net.layers) {
    u = apply_activation(layer.W * u + layer.b, layer.act);
  }
  if (net.out_scale.size() > 0) {
    u = u.cwiseProduct(net.out_scale) + net.out_shift;
  }
  return u;
}

double rmse(const FeedforwardNet& net, const TrainingDataset& dataset) {
  double sq = 0.0;
  long count = 0;
  for (const auto& rec : dataset.records) {
    if (!rec.ok) continue;
    const CommandSequence pred = infer(net, rec.x, rec.r);
    sq += (pred - rec.V_star).squaredNorm();
    count += pred.size();
  }
  if (count == 0) throw std::invalid_argument("rmse: empty dataset");
  return std::sqrt(sq / static_cast<double>(count));
}

}  // namespace govern
