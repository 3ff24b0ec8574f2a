#include "govern/nn.hpp"

#include "govern/sim.hpp"

namespace govern {

TrainingDataset collect_dataset(const PlantModel& plant, const GovernorWeights& weights,
                                const ReferenceProfile& profile, const StateVector& x0,
                                double nlp_tol) {
  TrainingDataset ds;
  ds.records.reserve(profile.total_steps);
  const InputInterval box = plant.input_interval();

  StateVector x = x0;
  CommandSequence warm;
  for (int t = 0; t < profile.total_steps; ++t) {
    const double r = profile.at(t);
    if (warm.size() == 0) warm = CommandSequence::Constant(weights.N + 1, saturate(box, r));
    const GovernorDecision d = mcg_step(plant, weights, x, r, warm, nlp_tol);

    DataRecord rec;
    rec.x = x;
    rec.r = r;
    rec.V_star = d.V_star;
    rec.ok = d.solve.status == SolveStatus::optimal;
    ds.records.push_back(std::move(rec));

    warm = warm_shift(d.V_star, r);
    x = plant.step(x, d.v_applied);
  }
  return ds;
}

}  // namespace govern
