#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "codicon/env/pacmen.hpp"
#include "codicon/env/visitation.hpp"
#include "codicon/harness/scripted_policy.hpp"
#include "codicon/marl/policy.hpp"

namespace codicon::harness {

using JointPolicy = std::function<env::JointAction(const env::PacmenEnv&, const env::EnvState&)>;

JointPolicy greedy_policy(marl::PolicyParams policies);
JointPolicy sampled_policy(marl::PolicyParams policies, std::uint64_t seed);
JointPolicy scripted_policy(ScriptedPolicy script);

// Greedy policy from a params file, or the script from a scripted-policy
// file. Throws std::runtime_error when the file is missing or malformed.
JointPolicy load_policy_file(const std::string& path);

struct EvalSummary {
  std::size_t episodes = 0;
  double mean_return = 0.0;
  double max_return = 0.0;
  double min_return = 0.0;
  double mean_length = 0.0;
  std::array<double, 4> mean_dots_by_room{};  // north, east, south, west
  std::vector<double> returns;
  env::VisitationCounter visitation;
  std::string replay;  // ASCII frames of the first episode

  explicit EvalSummary(const env::GridMap& map) : visitation(map) {}

  // Fraction of an agent's dwell time spent in `room`.
  double agent_room_share(const env::GridMap& map, std::size_t agent, env::Room room) const;
};

EvalSummary evaluate_policy(const env::PacmenEnv& env, const JointPolicy& policy, std::size_t episodes);

// One CSV row per environment step: global state followed by the team
// reward. Returns the number of rows written.
std::size_t dump_state_rewards(const env::PacmenEnv& env, const JointPolicy& policy, std::size_t episodes,
                               std::ostream& out);

}  // namespace codicon::harness
