#include "codicon/marl/policy.hpp"

namespace codicon::marl {
namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

PolicyParams PolicyParams::create(std::size_t num_agents, std::size_t observation_size, std::size_t num_actions,
                                  const std::vector<std::size_t>& hidden, Rng& rng) {
  PolicyParams p;
  for (std::size_t a = 0; a < num_agents; ++a) {
    p.agents.push_back(Mlp::init_uniform(layer_sizes(observation_size, hidden, num_actions), rng));
  }
  return p;
}

CriticParams CriticParams::create(std::size_t num_agents, std::size_t state_size,
                                  const std::vector<std::size_t>& hidden, Rng& rng) {
  CriticParams c;
  for (std::size_t a = 0; a < num_agents; ++a) {
    c.hybrid.push_back(Mlp::init_uniform(layer_sizes(state_size, hidden, 1), rng));
    c.hybrid_opt.emplace_back(c.hybrid.back().parameter_count());
  }
  c.extrinsic = Mlp::init_uniform(layer_sizes(state_size, hidden, 1), rng);
  c.extrinsic_opt = AdamState(c.extrinsic.parameter_count());
  return c;
}

}  // namespace codicon::marl
