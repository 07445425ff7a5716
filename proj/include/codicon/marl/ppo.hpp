#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "codicon/gradkit/mlp.hpp"
#include "codicon/gradkit/optim.hpp"
#include "codicon/marl/policy.hpp"
#include "codicon/marl/trajectory.hpp"

namespace codicon::marl {

// Clipped surrogate of one agent over a batch,
//   J = (1/N) sum_s min(p_s A_s, clip(p_s, 1-eps, 1+eps) A_s),
//   p_s = exp(log pi(u_s | o_s) - behavior_logp_s).
// A sample is "active" when the min picks an arm whose derivative in p is
// A_s; otherwise the clipped constant is selected and its gradient is zero.
struct SurrogateResult {
  double value = 0.0;
  FlatGrad grad;                     // dJ/dtheta
  std::vector<double> ratios;
  std::vector<std::uint8_t> active;
  std::vector<FlatGrad> ratio_grads; // d p_s / d theta, when requested
  double entropy = 0.0;              // mean policy entropy over the batch
};

SurrogateResult clipped_surrogate(const Mlp& policy, std::size_t agent, const TrajectoryBatch& batch,
                                  std::span<const double> advantages, double clip, bool keep_ratio_grads = false,
                                  double entropy_coef = 0.0);

// Per-agent, per-sample record of the realized policy step
// theta' = theta + alpha * sum_s weight_s * active_s * A_s * grad p_s.
struct PolicyUpdateCache {
  double alpha = 0.0;
  std::vector<double> weights;                        // [sample]
  std::vector<std::vector<FlatGrad>> ratio_grads;     // [agent][sample]
  std::vector<std::vector<std::uint8_t>> active;      // [agent][sample]

  bool empty() const { return ratio_grads.empty(); }
};

struct PpoOptions {
  double lr = 0.1;
  double clip = 0.2;
  double entropy_coef = 0.0;
  // Rescale each agent's advantages to zero mean, unit variance. Makes the
  // cached step inexact with respect to the intrinsic rewards.
  bool normalize_advantages = false;
  bool keep_cache = true;
  // With keep_cache, also store every d p_s / d theta. Without them the
  // cache only holds the active flags and weights.
  bool keep_ratio_grads = true;
};

struct PpoResult {
  PolicyUpdateCache cache;
  std::vector<double> surrogate;          // per agent, before the step
  std::vector<UpdateStatus> status;       // per agent
  double clip_fraction = 0.0;
  double entropy = 0.0;
};

// One plain gradient-ascent step per agent on the clipped surrogate with the
// hybrid advantages.
PpoResult ppo_policy_update(PolicyParams& policies, const TrajectoryBatch& batch,
                            const std::vector<std::vector<double>>& advantages, const PpoOptions& options);

}  // namespace codicon::marl
