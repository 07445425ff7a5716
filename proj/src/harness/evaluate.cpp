#include "codicon/harness/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "codicon/gradkit/sampling.hpp"
#include "codicon/harness/params_io.hpp"

namespace codicon::harness {

JointPolicy greedy_policy(marl::PolicyParams policies) {
  return [policies = std::move(policies)](const env::PacmenEnv& env, const env::EnvState& state) {
    env::JointAction joint{};
    for (std::size_t a = 0; a < env::kNumAgents; ++a) {
      joint[a] = argmax(policies.agents[a].forward(env.observe(state, a).features));
    }
    return joint;
  };
}

JointPolicy sampled_policy(marl::PolicyParams policies, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [policies = std::move(policies), rng](const env::PacmenEnv& env, const env::EnvState& state) {
    env::JointAction joint{};
    for (std::size_t a = 0; a < env::kNumAgents; ++a) {
      joint[a] = softmax_sample(policies.agents[a].forward(env.observe(state, a).features), *rng).action;
    }
    return joint;
  };
}

JointPolicy scripted_policy(ScriptedPolicy script) {
  return [script = std::move(script)](const env::PacmenEnv&, const env::EnvState& state) {
    return script.act(state.timestep);
  };
}

JointPolicy load_policy_file(const std::string& path) {
  if (ScriptedPolicy::is_scripted_file(path)) return scripted_policy(ScriptedPolicy::load(path));
  const ParamsBundle bundle = load_params(path);
  marl::PolicyParams policies;
  for (std::size_t a = 0; a < env::kNumAgents; ++a) {
    const Mlp* net = bundle.find_net("policy_" + std::to_string(a));
    if (!net) throw std::runtime_error(path + ": missing policy_" + std::to_string(a));
    policies.agents.push_back(*net);
  }
  return greedy_policy(std::move(policies));
}

double EvalSummary::agent_room_share(const env::GridMap& map, std::size_t agent, env::Room room) const {
  const std::uint64_t total = visitation.agent_total(agent);
  return total ? static_cast<double>(visitation.agent_room_mass(map, agent, room)) / static_cast<double>(total) : 0.0;
}

EvalSummary evaluate_policy(const env::PacmenEnv& env, const JointPolicy& policy, std::size_t episodes) {
  EvalSummary summary(env.map());
  summary.episodes = episodes;
  for (std::size_t e = 0; e < episodes; ++e) {
    env::EnvState state = env.reset();
    summary.visitation.add(state);
    if (e == 0) summary.replay += env::render_ascii(env.map(), state);
    double ret = 0.0;
    while (!env.is_done(state)) {
      const env::StepOutcome out = env.step(state, policy(env, state));
      ret += out.team_reward;
      for (std::size_t r = 0; r < env::kPeripheralRooms.size(); ++r) {
        summary.mean_dots_by_room[r] += env.count_in_room(out.eaten_mask, env::kPeripheralRooms[r]);
      }
      state = out.next_state;
      summary.visitation.add(state);
      if (e == 0) summary.replay += env::render_ascii(env.map(), state);
    }
    summary.returns.push_back(ret);
    summary.mean_length += state.timestep;
  }
  if (episodes > 0) {
    const double n = static_cast<double>(episodes);
    for (double r : summary.returns) summary.mean_return += r / n;
    summary.max_return = *std::max_element(summary.returns.begin(), summary.returns.end());
    summary.min_return = *std::min_element(summary.returns.begin(), summary.returns.end());
    summary.mean_length /= n;
    for (double& d : summary.mean_dots_by_room) d /= n;
  }
  return summary;
}

std::size_t dump_state_rewards(const env::PacmenEnv& env, const JointPolicy& policy, std::size_t episodes,
                               std::ostream& out) {
  std::size_t rows = 0;
  char buf[32];
  for (std::size_t e = 0; e < episodes; ++e) {
    env::EnvState state = env.reset();
    while (!env.is_done(state)) {
      const std::vector<double> s = env.global_state(state);
      const env::StepOutcome step = env.step(state, policy(env, state));
      for (double v : s) {
        std::snprintf(buf, sizeof buf, "%.17g,", v);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g", step.team_reward);
      out << buf << '\n';
      ++rows;
      state = step.next_state;
    }
  }
  return rows;
}

}  // namespace codicon::harness
