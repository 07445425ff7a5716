#include "codicon/marl/trajectory.hpp"

#include <stdexcept>

#include "codicon/gradkit/sampling.hpp"

namespace codicon::marl {

TrajectoryBatch collect_trajectories(const PolicyParams& policies, const ranking::RankingParams& ranking,
                                     const env::PacmenEnv& env, const CollectOptions& options, std::uint64_t seed) {
  constexpr std::size_t n = env::kNumAgents;
  if (policies.num_agents() != n || ranking.num_agents != n) {
    throw std::invalid_argument("collect_trajectories: agent count mismatch");
  }
  TrajectoryBatch batch;
  batch.num_agents = n;
  batch.lambda = options.lambda;
  batch.gamma = options.gamma;
  batch.steps.reserve(options.episodes * env::kEpisodeLimit);

  for (std::size_t e = 0; e < options.episodes; ++e) {
    Rng rng(derive_seed(seed, e));
    env::EnvState state = env.reset();
    EpisodeSummary summary;
    for (;;) {
      StepRecord rec;
      rec.episode = e;
      rec.timestep = state.timestep;
      rec.state = env.global_state(state);
      env::JointAction joint{};
      for (std::size_t a = 0; a < n; ++a) {
        rec.observations.push_back(env.observe(state, a).features);
        const std::vector<double> logits = policies.agents[a].forward(rec.observations.back());
        const ActionSample s = softmax_sample(logits, rng);
        joint[a] = s.action;
        rec.actions.push_back(s.action);
        rec.behavior_logp.push_back(s.log_prob);
      }
      rec.ranking_input = ranking.encode(rec.state, rec.actions);
      const ranking::IntrinsicRewards in = ranking::compute_intrinsic(ranking.net, rec.ranking_input);

      const env::StepOutcome out = env.step(state, joint);
      rec.extrinsic_reward = out.team_reward;
      rec.done = out.done;
      for (std::size_t a = 0; a < n; ++a) {
        rec.reward_source.push_back(in.source_of(a, options.assignment));
        rec.intrinsic.push_back(in.raw[rec.reward_source.back()]);
        rec.hybrid.push_back(out.team_reward + options.lambda * rec.intrinsic.back());
      }
      summary.extrinsic_return += out.team_reward;
      summary.dots_eaten += out.dots_eaten_this_step;
      for (std::size_t r = 0; r < env::kPeripheralRooms.size(); ++r) {
        summary.dots_by_room[r] += env.count_in_room(out.eaten_mask, env::kPeripheralRooms[r]);
      }
      batch.steps.push_back(std::move(rec));
      state = out.next_state;
      if (out.done) break;
    }
    summary.length = state.timestep;
    batch.episodes.push_back(summary);
  }
  compute_returns(batch);
  return batch;
}

void compute_returns(TrajectoryBatch& batch) {
  std::vector<double> next_hybrid(batch.num_agents, 0.0);
  double next_extrinsic = 0.0;
  for (std::size_t t = batch.steps.size(); t-- > 0;) {
    StepRecord& s = batch.steps[t];
    if (s.done) {
      std::fill(next_hybrid.begin(), next_hybrid.end(), 0.0);
      next_extrinsic = 0.0;
    }
    s.hybrid_return.resize(batch.num_agents);
    for (std::size_t a = 0; a < batch.num_agents; ++a) {
      s.hybrid_return[a] = s.hybrid[a] + batch.gamma * next_hybrid[a];
      next_hybrid[a] = s.hybrid_return[a];
    }
    s.extrinsic_return = s.extrinsic_reward + batch.gamma * next_extrinsic;
    next_extrinsic = s.extrinsic_return;
  }
}

}  // namespace codicon::marl
