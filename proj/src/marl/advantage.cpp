#include "codicon/marl/advantage.hpp"

#include <stdexcept>

namespace codicon::marl {
namespace {

std::vector<double> evaluate(const Mlp& critic, const TrajectoryBatch& batch) {
  std::vector<double> v(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) v[t] = critic.forward(batch.steps[t].state)[0];
  return v;
}

}  // namespace

std::vector<double> td_advantage(const TrajectoryBatch& batch, const std::vector<double>& rewards,
                                 const std::vector<double>& values, double gae_lambda) {
  if (rewards.size() != batch.size() || values.size() != batch.size()) {
    throw std::invalid_argument("td_advantage: length mismatch");
  }
  std::vector<double> adv(batch.size());
  const double decay = batch.gamma * gae_lambda;
  double next_adv = 0.0;
  for (std::size_t t = batch.size(); t-- > 0;) {
    const bool done = batch.steps[t].done;
    const double next_value = done ? 0.0 : values[t + 1];
    const double delta = rewards[t] + batch.gamma * next_value - values[t];
    adv[t] = done || decay == 0.0 ? delta : delta + decay * next_adv;
    next_adv = adv[t];
  }
  return adv;
}

std::vector<std::vector<double>> hybrid_advantage(const TrajectoryBatch& batch, const CriticParams& critics,
                                                  double gae_lambda) {
  if (critics.hybrid.size() != batch.num_agents) throw std::invalid_argument("hybrid_advantage: critic count");
  std::vector<std::vector<double>> out(batch.num_agents);
  std::vector<double> rewards(batch.size());
  for (std::size_t a = 0; a < batch.num_agents; ++a) {
    for (std::size_t t = 0; t < batch.size(); ++t) rewards[t] = batch.steps[t].hybrid[a];
    out[a] = td_advantage(batch, rewards, evaluate(critics.hybrid[a], batch), gae_lambda);
  }
  return out;
}

std::vector<double> extrinsic_advantage(const TrajectoryBatch& batch, const CriticParams& critics,
                                        double gae_lambda) {
  std::vector<double> rewards(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) rewards[t] = batch.steps[t].extrinsic_reward;
  return td_advantage(batch, rewards, evaluate(critics.extrinsic, batch), gae_lambda);
}

AdvantageRecord compute_advantages(const TrajectoryBatch& batch, const CriticParams& critics, double gae_lambda) {
  return {hybrid_advantage(batch, critics, gae_lambda), extrinsic_advantage(batch, critics, gae_lambda)};
}

}  // namespace codicon::marl
