#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "codicon/env/pacmen.hpp"
#include "codicon/marl/policy.hpp"
#include "codicon/ranking/ranking.hpp"

namespace codicon::marl {

struct StepRecord {
  std::vector<double> state;                      // global state s_t
  std::vector<std::vector<double>> observations;  // per agent
  std::vector<std::size_t> actions;
  std::vector<double> behavior_logp;              // log pi_old(u_i | o_i)
  double extrinsic_reward = 0.0;
  std::vector<double> intrinsic;                  // per agent, as assigned
  std::vector<double> hybrid;                     // extrinsic + lambda * intrinsic
  std::vector<double> ranking_input;              // encoded (s_t, u_t)
  std::vector<std::size_t> reward_source;         // ranking output feeding each agent
  bool done = false;
  std::size_t episode = 0;
  int timestep = 0;
  // Discounted returns from this step to the end of the episode.
  std::vector<double> hybrid_return;
  double extrinsic_return = 0.0;
};

struct EpisodeSummary {
  double extrinsic_return = 0.0;  // undiscounted
  int length = 0;
  int dots_eaten = 0;
  std::array<int, 4> dots_by_room{};  // north, east, south, west
};

// Steps of consecutive episodes; every episode ends with a done step.
struct TrajectoryBatch {
  std::size_t num_agents = 0;
  double lambda = 0.0;
  double gamma = 0.0;
  std::vector<StepRecord> steps;
  std::vector<EpisodeSummary> episodes;

  std::size_t size() const { return steps.size(); }
};

struct CollectOptions {
  std::size_t episodes = 16;
  double lambda = 0.1;
  double gamma = 0.99;
  ranking::AssignmentMode assignment = ranking::AssignmentMode::kIdentity;
};

// Samples actions from the current policies; episode e draws from the
// stream derive_seed(seed, e), so the batch is independent of scheduling.
TrajectoryBatch collect_trajectories(const PolicyParams& policies, const ranking::RankingParams& ranking,
                                     const env::PacmenEnv& env, const CollectOptions& options, std::uint64_t seed);

// Fills hybrid_return / extrinsic_return by R_t = r_t + gamma * R_{t+1}.
void compute_returns(TrajectoryBatch& batch);

}  // namespace codicon::marl
