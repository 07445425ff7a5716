#include "codicon/meta/metagrad.hpp"

#include <cmath>
#include <stdexcept>

#include "codicon/gradkit/sampling.hpp"

#include "codicon/simd/kernels.hpp"

namespace codicon::meta {

UpdateCache build_cache(const marl::TrajectoryBatch& batch, marl::PolicyUpdateCache policy_step, const Mlp& reward_net,
                        double lambda, double trace_decay) {
  const std::size_t agents = batch.num_agents;
  const std::size_t samples = batch.size();
  if (policy_step.ratio_grads.size() != agents || policy_step.active.size() != agents ||
      policy_step.weights.size() != samples) {
    throw std::logic_error("build_cache: policy update cache does not match the batch");
  }
  for (std::size_t a = 0; a < agents; ++a) {
    if (policy_step.ratio_grads[a].size() != samples || policy_step.active[a].size() != samples) {
      throw std::logic_error("build_cache: policy update cache does not match the batch");
    }
  }
  if (reward_net.output_size() != agents) throw std::logic_error("build_cache: reward net output size");

  UpdateCache cache;
  cache.num_agents = agents;
  cache.alpha = policy_step.alpha;
  cache.lambda = lambda;
  cache.trace_decay = trace_decay;
  cache.weights = std::move(policy_step.weights);
  cache.ratio_grads = std::move(policy_step.ratio_grads);
  cache.active = std::move(policy_step.active);
  cache.episode.resize(samples);
  cache.reward_grads.assign(agents, {});
  for (auto& per_agent : cache.reward_grads) per_agent.reserve(samples);

  MlpTape tape;
  std::vector<double> seed(agents, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const marl::StepRecord& step = batch.steps[s];
    cache.episode[s] = step.episode;
    reward_net.forward(step.ranking_input, tape);
    for (std::size_t a = 0; a < agents; ++a) {
      FlatGrad g(reward_net.parameter_count());
      seed.assign(agents, 0.0);
      seed[step.reward_source[a]] = 1.0;
      reward_net.backward_accumulate(tape, seed, g.span());
      cache.reward_grads[a].push_back(std::move(g));
    }
  }
  return cache;
}

std::vector<FlatGrad> extrinsic_policy_grad(const marl::PolicyParams& updated, const marl::TrajectoryBatch& batch,
                                            std::span<const double> extrinsic_advantages, double clip) {
  std::vector<FlatGrad> out;
  for (std::size_t a = 0; a < updated.num_agents(); ++a) {
    out.push_back(marl::clipped_surrogate(updated.agents[a], a, batch, extrinsic_advantages, clip).grad);
  }
  return out;
}

MetaGrad meta_gradient(const UpdateCache& cache, std::span<const FlatGrad> g_ex) {
  if (g_ex.size() != cache.num_agents) throw std::invalid_argument("meta_gradient: agent count mismatch");
  if (cache.reward_grads.empty() || cache.reward_grads.front().empty()) {
    throw std::invalid_argument("meta_gradient: empty cache");
  }
  const std::size_t eta_size = cache.reward_grads.front().front().size();
  MetaGrad meta{FlatGrad(eta_size)};
  const std::size_t samples = cache.num_samples();
  const double scale = cache.alpha * cache.lambda;
  if (scale == 0.0) return meta;

  std::vector<double> coeff(samples);
  for (std::size_t a = 0; a < cache.num_agents; ++a) {
    for (std::size_t s = 0; s < samples; ++s) {
      const FlatGrad& rg = cache.ratio_grads[a][s];
      if (rg.size() != g_ex[a].size()) throw std::invalid_argument("meta_gradient: theta dimension mismatch");
      coeff[s] = cache.active[a][s] ? scale * cache.weights[s] * simd::dot(g_ex[a].values.data(), rg.values.data(), rg.size())
                                    : 0.0;
    }
    // The reward at step t enters the advantages of steps s <= t of its
    // episode with weight trace_decay^(t - s).
    double carried = 0.0;
    for (std::size_t t = 0; t < samples; ++t) {
      const bool same_episode = t > 0 && cache.episode[t] == cache.episode[t - 1];
      carried = coeff[t] + (same_episode ? cache.trace_decay * carried : 0.0);
      if (carried != 0.0) {
        const FlatGrad& eg = cache.reward_grads[a][t];
        simd::axpy(carried, eg.values.data(), meta.values.values.data(), eta_size);
      }
    }
  }
  return meta;
}

MetaGrad meta_gradient_streaming(const marl::TrajectoryBatch& batch, const marl::PolicyParams& behavior,
                                 const marl::PolicyUpdateCache& step, const Mlp& reward_net, double lambda,
                                 double trace_decay, std::span<const FlatGrad> g_ex) {
  const std::size_t agents = batch.num_agents;
  const std::size_t samples = batch.size();
  if (g_ex.size() != agents || behavior.num_agents() != agents) {
    throw std::invalid_argument("meta_gradient_streaming: agent count mismatch");
  }
  if (step.active.size() != agents || step.weights.size() != samples) {
    throw std::logic_error("meta_gradient_streaming: policy update cache does not match the batch");
  }
  if (reward_net.output_size() != agents) throw std::logic_error("meta_gradient_streaming: reward net output size");
  MetaGrad meta{FlatGrad(reward_net.parameter_count())};
  const double scale = step.alpha * lambda;
  if (scale == 0.0) return meta;

  // coeff[a][s] = scale * w_s * active * (g_ex_a . d p_s / d theta_a)
  std::vector<std::vector<double>> coeff(agents, std::vector<double>(samples, 0.0));
  MlpTape tape;
  for (std::size_t a = 0; a < agents; ++a) {
    const Mlp& policy = behavior.agents[a];
    if (g_ex[a].size() != policy.parameter_count()) {
      throw std::invalid_argument("meta_gradient_streaming: theta dimension mismatch");
    }
    if (step.active[a].size() != samples) {
      throw std::logic_error("meta_gradient_streaming: policy update cache does not match the batch");
    }
    for (std::size_t s = 0; s < samples; ++s) {
      if (!step.active[a][s]) continue;
      const marl::StepRecord& rec = batch.steps[s];
      policy.forward(rec.observations[a], tape);
      const std::vector<double> logp = log_softmax(tape.output());
      const std::vector<double> dlogits = policy.jvp(tape, g_ex[a].span());
      const std::size_t action = rec.actions[a];
      const double ratio = std::exp(logp[action] - rec.behavior_logp[a]);
      // d p = p * (d z_action - sum_k pi_k d z_k)
      double mean_dz = 0.0;
      for (std::size_t k = 0; k < dlogits.size(); ++k) mean_dz += std::exp(logp[k]) * dlogits[k];
      coeff[a][s] = scale * step.weights[s] * ratio * (dlogits[action] - mean_dz);
    }
  }

  std::vector<double> carried(agents, 0.0);
  std::vector<double> seed(agents);
  for (std::size_t t = 0; t < samples; ++t) {
    const marl::StepRecord& rec = batch.steps[t];
    const bool same_episode = t > 0 && rec.episode == batch.steps[t - 1].episode;
    seed.assign(agents, 0.0);
    bool any = false;
    for (std::size_t a = 0; a < agents; ++a) {
      carried[a] = coeff[a][t] + (same_episode ? trace_decay * carried[a] : 0.0);
      seed[rec.reward_source[a]] += carried[a];
      any = any || carried[a] != 0.0;
    }
    if (!any) continue;
    reward_net.forward(rec.ranking_input, tape);
    reward_net.backward_accumulate(tape, seed, meta.values.span());
  }
  return meta;
}

UpdateStatus update_eta_meta(Mlp& reward_net, const MetaGrad& meta, double lr) {
  return sgd_step(reward_net.params(), meta.values, lr, Direction::kAscent);
}

}  // namespace codicon::meta
