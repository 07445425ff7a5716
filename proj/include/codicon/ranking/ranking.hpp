#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "codicon/gradkit/mlp.hpp"
#include "codicon/gradkit/optim.hpp"
#include "codicon/gradkit/rng.hpp"

namespace codicon::ranking {

// How the n network outputs become per-agent intrinsic rewards.
//   kIdentity:   agent i receives raw[i].
//   kPositional: agent i receives sorted[i], the i-th smallest output.
enum class AssignmentMode { kIdentity, kPositional };

// Fixed ascending target for the sorted intrinsic rewards: ceil(n/5)
// entries in (0, 1], the rest in [-1, 0).
struct TargetSequence {
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  // Bitwise hash of the values, for checking the target never moves.
  std::uint64_t fingerprint() const;
};

TargetSequence init_targets(std::size_t n, Rng& rng);

struct IntrinsicRewards {
  std::vector<double> raw;          // agent-indexed
  std::vector<double> sorted;       // ascending
  std::vector<std::size_t> perm;    // sorted[k] == raw[perm[k]]

  double reward_for(std::size_t agent, AssignmentMode mode) const;
  // Index into raw whose value agent receives.
  std::size_t source_of(std::size_t agent, AssignmentMode mode) const;
};

// Stable sort by value; ties keep agent order.
IntrinsicRewards sort_rewards(std::vector<double> raw);

// Centralized reward network. Input: global state, then for every agent a
// one-hot action block followed by a one-hot id block. Output: n scores.
struct RankingParams {
  Mlp net;
  std::size_t num_agents = 0;
  std::size_t num_actions = 0;
  std::size_t state_size = 0;

  static RankingParams create(std::size_t num_agents, std::size_t num_actions, std::size_t state_size,
                              const std::vector<std::size_t>& hidden, Rng& rng);

  std::size_t input_size() const { return state_size + num_agents * (num_actions + num_agents); }
  std::vector<double> encode(std::span<const double> state, std::span<const std::size_t> joint_action) const;
};

// Throws std::runtime_error if the net produces a non-finite output.
IntrinsicRewards compute_intrinsic(const Mlp& net, std::span<const double> encoded_input);
IntrinsicRewards compute_intrinsic(const RankingParams& params, std::span<const double> state,
                                   std::span<const std::size_t> joint_action);

// (1/n) sum (sorted_i - y_i)^2
double loss_mse(std::span<const double> sorted, const TargetSequence& targets);
// (1/n) sum (raw_i - mean)^2
double loss_var(std::span<const double> raw);

struct RankLoss {
  double loss = 0.0;      // beta1 * mean mse - beta2 * mean var
  double mean_mse = 0.0;
  double mean_var = 0.0;
  FlatGrad grad;          // d loss / d eta
};

// Gradients of the sorted entries flow back to the raw entries they came
// from, i.e. through the permutation.
RankLoss rank_loss(const Mlp& net, std::span<const std::vector<double>> inputs, const TargetSequence& targets,
                   double beta1, double beta2);

// eta <- eta - lr * grad rank_loss. Skips the step on a non-finite gradient.
UpdateStatus update_eta_rank(Mlp& net, std::span<const std::vector<double>> inputs,
                             const TargetSequence& targets, double beta1, double beta2, double lr,
                             RankLoss* evaluated = nullptr);

}  // namespace codicon::ranking
