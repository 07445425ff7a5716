#include "codicon/marl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "codicon/gradkit/sampling.hpp"
#include "codicon/simd/kernels.hpp"

namespace codicon::marl {
namespace {

std::vector<double> normalized(std::span<const double> adv) {
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n) + 1e-8;
  std::vector<double> out(adv.size());
  for (std::size_t k = 0; k < adv.size(); ++k) out[k] = (adv[k] - mean) / sd;
  return out;
}

}  // namespace

SurrogateResult clipped_surrogate(const Mlp& policy, std::size_t agent, const TrajectoryBatch& batch,
                                  std::span<const double> advantages, double clip, bool keep_ratio_grads,
                                  double entropy_coef) {
  const std::size_t n = batch.size();
  if (advantages.size() != n) throw std::invalid_argument("clipped_surrogate: advantage length mismatch");
  if (n == 0) throw std::invalid_argument("clipped_surrogate: empty batch");
  const double weight = 1.0 / static_cast<double>(n);

  SurrogateResult out;
  out.grad = FlatGrad(policy.parameter_count());
  out.ratios.resize(n);
  out.active.resize(n);
  if (keep_ratio_grads) out.ratio_grads.reserve(n);

  MlpTape tape;
  std::vector<double> seed(policy.output_size());
  for (std::size_t s = 0; s < n; ++s) {
    const StepRecord& step = batch.steps[s];
    policy.forward(step.observations[agent], tape);
    const std::vector<double> logp = log_softmax(tape.output());
    const std::size_t action = step.actions[agent];
    const double ratio = std::exp(logp[action] - step.behavior_logp[agent]);
    const double adv = advantages[s];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    // NaN lands on the active arm so it reaches the gradient and the step is rejected.
    const bool active = !(clipped < unclipped);
    out.ratios[s] = ratio;
    out.active[s] = active ? 1 : 0;
    out.value += weight * std::min(unclipped, clipped);

    // d p / d logits = p * (e_action - softmax)
    for (std::size_t k = 0; k < seed.size(); ++k) seed[k] = -ratio * std::exp(logp[k]);
    seed[action] += ratio;
    if (keep_ratio_grads) {
      FlatGrad g(policy.parameter_count());
      policy.backward_accumulate(tape, seed, g.span());
      if (active && adv != 0.0) simd::axpy(weight * adv, g.values.data(), out.grad.values.data(), g.size());
      out.ratio_grads.push_back(std::move(g));
    } else if (active && adv != 0.0) {
      policy.backward_accumulate(tape, seed, out.grad.span(), weight * adv);
    }

    double entropy = 0.0;
    for (double lp : logp) entropy -= std::exp(lp) * lp;
    out.entropy += weight * entropy;
    if (entropy_coef != 0.0) {
      // dH/dz_k = -pi_k (log pi_k + H)
      for (std::size_t k = 0; k < seed.size(); ++k) seed[k] = -std::exp(logp[k]) * (logp[k] + entropy);
      policy.backward_accumulate(tape, seed, out.grad.span(), weight * entropy_coef);
    }
  }
  return out;
}

PpoResult ppo_policy_update(PolicyParams& policies, const TrajectoryBatch& batch,
                            const std::vector<std::vector<double>>& advantages, const PpoOptions& options) {
  const std::size_t agents = policies.num_agents();
  if (advantages.size() != agents || batch.num_agents != agents) {
    throw std::invalid_argument("ppo_policy_update: agent count mismatch");
  }
  PpoResult result;
  if (options.keep_cache) {
    result.cache.alpha = options.lr;
    result.cache.weights.assign(batch.size(), 1.0 / static_cast<double>(batch.size()));
    result.cache.ratio_grads.resize(agents);
    result.cache.active.resize(agents);
  }
  std::size_t clipped = 0;
  for (std::size_t a = 0; a < agents; ++a) {
    const std::vector<double> adv =
        options.normalize_advantages ? normalized(advantages[a]) : advantages[a];
    SurrogateResult sur = clipped_surrogate(policies.agents[a], a, batch, adv, options.clip, options.keep_cache && options.keep_ratio_grads,
                                            options.entropy_coef);
    result.surrogate.push_back(sur.value);
    result.entropy += sur.entropy / static_cast<double>(agents);
    clipped += static_cast<std::size_t>(std::count(sur.active.begin(), sur.active.end(), 0));
    result.status.push_back(sgd_step(policies.agents[a].params(), sur.grad, options.lr, Direction::kAscent));
    // A rejected step left theta unchanged, so nothing flows through it.
    if (!result.status.back()) std::fill(sur.active.begin(), sur.active.end(), std::uint8_t{0});
    if (options.keep_cache) {
      result.cache.ratio_grads[a] = std::move(sur.ratio_grads);
      result.cache.active[a] = std::move(sur.active);
    }
  }
  result.clip_fraction = static_cast<double>(clipped) / static_cast<double>(agents * batch.size());
  return result;
}

}  // namespace codicon::marl
