#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "codicon/gradkit/mlp.hpp"
#include "codicon/gradkit/optim.hpp"
#include "codicon/marl/policy.hpp"
#include "codicon/marl/ppo.hpp"
#include "codicon/marl/trajectory.hpp"

namespace codicon::meta {

// Per-sample pieces of the realized policy step, enough to differentiate
// theta_i' with respect to the reward-net parameters eta. With one-step
// advantages
//
//   d theta_i' / d eta = alpha * lambda * sum_s w_s * active_{i,s} * grad_theta p_{i,s} (x) grad_eta r_in_{i,s}
//
// With GAE the advantage at s also picks up later intrinsic rewards of the
// same episode, weighted by powers of trace_decay = gamma * gae_lambda.
struct UpdateCache {
  std::size_t num_agents = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  double trace_decay = 0.0;
  std::vector<double> weights;                       // [sample]
  std::vector<std::size_t> episode;                  // [sample]
  std::vector<std::vector<FlatGrad>> ratio_grads;    // [agent][sample], over theta_i
  std::vector<std::vector<std::uint8_t>> active;     // [agent][sample]
  std::vector<std::vector<FlatGrad>> reward_grads;   // [agent][sample], over eta

  std::size_t num_samples() const { return weights.size(); }
};

// `policy_step` must come from ppo_policy_update on this same batch; the
// reward gradients are taken at the current `reward_net` parameters.
UpdateCache build_cache(const marl::TrajectoryBatch& batch, marl::PolicyUpdateCache policy_step, const Mlp& reward_net,
                        double lambda, double trace_decay = 0.0);

// Per-agent gradient of the clipped extrinsic surrogate at the updated
// policies, ratios against the batch's behavior log-probs.
std::vector<FlatGrad> extrinsic_policy_grad(const marl::PolicyParams& updated, const marl::TrajectoryBatch& batch,
                                            std::span<const double> extrinsic_advantages, double clip);

struct MetaGrad {
  FlatGrad values;
};

// sum_i g_ex_i . d theta_i'/d eta: one theta-space dot product per
// (agent, sample), scaling that sample's eta-gradient.
MetaGrad meta_gradient(const UpdateCache& cache, std::span<const FlatGrad> g_ex);

// Same quantity as meta_gradient(build_cache(batch, step, ...), g_ex)
// without materializing per-sample gradients: each g_ex . d p_s / d theta is
// a forward-mode directional derivative at the pre-update `behavior`
// policies, and the eta-gradients are accumulated by one reward-net backward
// pass per sample. `step` only needs its active flags and weights.
MetaGrad meta_gradient_streaming(const marl::TrajectoryBatch& batch, const marl::PolicyParams& behavior,
                                 const marl::PolicyUpdateCache& step, const Mlp& reward_net, double lambda,
                                 double trace_decay, std::span<const FlatGrad> g_ex);

// Ascent: eta <- eta + lr * meta. Skips on non-finite input.
UpdateStatus update_eta_meta(Mlp& reward_net, const MetaGrad& meta, double lr);

}  // namespace codicon::meta
