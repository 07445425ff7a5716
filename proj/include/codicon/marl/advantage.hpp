#pragma once

#include <vector>

#include "codicon/marl/policy.hpp"
#include "codicon/marl/trajectory.hpp"

namespace codicon::marl {

struct AdvantageRecord {
  std::vector<std::vector<double>> hybrid;  // [agent][step]
  std::vector<double> extrinsic;            // [step]
};

// A_t = r_t + gamma * V(s_{t+1}) - V(s_t), with V(s_{t+1}) = 0 after a done
// step. gae_lambda > 0 replaces this with the exponentially weighted sum of
// those one-step terms (GAE).
std::vector<std::vector<double>> hybrid_advantage(const TrajectoryBatch& batch, const CriticParams& critics,
                                                  double gae_lambda = 0.0);
std::vector<double> extrinsic_advantage(const TrajectoryBatch& batch, const CriticParams& critics,
                                        double gae_lambda = 0.0);

AdvantageRecord compute_advantages(const TrajectoryBatch& batch, const CriticParams& critics,
                                   double gae_lambda = 0.0);

// Core recursion shared by both critics, exposed for tests.
std::vector<double> td_advantage(const TrajectoryBatch& batch, const std::vector<double>& rewards,
                                 const std::vector<double>& values, double gae_lambda);

}  // namespace codicon::marl
