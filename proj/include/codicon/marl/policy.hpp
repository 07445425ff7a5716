#pragma once

#include <cstddef>
#include <vector>

#include "codicon/gradkit/mlp.hpp"
#include "codicon/gradkit/optim.hpp"
#include "codicon/gradkit/rng.hpp"

namespace codicon::marl {

// One independent policy net per agent: observation -> action logits.
struct PolicyParams {
  std::vector<Mlp> agents;

  static PolicyParams create(std::size_t num_agents, std::size_t observation_size, std::size_t num_actions,
                             const std::vector<std::size_t>& hidden, Rng& rng);

  std::size_t num_agents() const { return agents.size(); }
};

// Per-agent hybrid critics and one extrinsic critic, all on the global state.
struct CriticParams {
  std::vector<Mlp> hybrid;
  Mlp extrinsic;
  std::vector<AdamState> hybrid_opt;
  AdamState extrinsic_opt;

  static CriticParams create(std::size_t num_agents, std::size_t state_size, const std::vector<std::size_t>& hidden,
                             Rng& rng);
};

}  // namespace codicon::marl
