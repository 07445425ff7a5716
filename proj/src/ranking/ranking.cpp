#include "codicon/ranking/ranking.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace codicon::ranking {

std::uint64_t TargetSequence::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : y) {
    h ^= std::bit_cast<std::uint64_t>(v);
    h *= 0x100000001b3ULL;
  }
  return h;
}

TargetSequence init_targets(std::size_t n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("init_targets: need at least two agents");
  const std::size_t positives = (n + 4) / 5;  // ceil(0.2 n)
  TargetSequence t;
  t.y.resize(n);
  auto draw = [&](std::size_t k) {
    // (0, 1] for the positive block, [-1, 0) for the rest.
    t.y[k] = k < positives ? 1.0 - rng.uniform() : -1.0 + rng.uniform();
  };
  for (std::size_t k = 0; k < n; ++k) draw(k);
  for (;;) {
    std::sort(t.y.begin(), t.y.end());
    const auto dup = std::adjacent_find(t.y.begin(), t.y.end());
    if (dup == t.y.end()) break;
    // Redraw one of the tied values with the same sign.
    const std::size_t k = static_cast<std::size_t>(dup - t.y.begin());
    t.y[k] = *dup > 0.0 ? 1.0 - rng.uniform() : -1.0 + rng.uniform();
  }
  return t;
}

double IntrinsicRewards::reward_for(std::size_t agent, AssignmentMode mode) const {
  return raw[source_of(agent, mode)];
}

std::size_t IntrinsicRewards::source_of(std::size_t agent, AssignmentMode mode) const {
  return mode == AssignmentMode::kIdentity ? agent : perm[agent];
}

IntrinsicRewards sort_rewards(std::vector<double> raw) {
  IntrinsicRewards r;
  r.perm.resize(raw.size());
  std::iota(r.perm.begin(), r.perm.end(), std::size_t{0});
  std::stable_sort(r.perm.begin(), r.perm.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  r.sorted.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) r.sorted[k] = raw[r.perm[k]];
  r.raw = std::move(raw);
  return r;
}

RankingParams RankingParams::create(std::size_t num_agents, std::size_t num_actions, std::size_t state_size,
                                    const std::vector<std::size_t>& hidden, Rng& rng) {
  RankingParams p;
  p.num_agents = num_agents;
  p.num_actions = num_actions;
  p.state_size = state_size;
  std::vector<std::size_t> sizes{p.input_size()};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(num_agents);
  p.net = Mlp::init_uniform(sizes, rng);
  return p;
}

std::vector<double> RankingParams::encode(std::span<const double> state,
                                          std::span<const std::size_t> joint_action) const {
  if (state.size() != state_size || joint_action.size() != num_agents) {
    throw std::invalid_argument("RankingParams::encode: dimension mismatch");
  }
  std::vector<double> x(input_size(), 0.0);
  std::copy(state.begin(), state.end(), x.begin());
  const std::size_t block = num_actions + num_agents;
  for (std::size_t a = 0; a < num_agents; ++a) {
    if (joint_action[a] >= num_actions) throw std::invalid_argument("RankingParams::encode: bad action");
    x[state_size + a * block + joint_action[a]] = 1.0;
    x[state_size + a * block + num_actions + a] = 1.0;
  }
  return x;
}

IntrinsicRewards compute_intrinsic(const Mlp& net, std::span<const double> encoded_input) {
  std::vector<double> raw = net.forward(encoded_input);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw std::runtime_error("ranking net produced non-finite output for agent " + std::to_string(i));
    }
  }
  return sort_rewards(std::move(raw));
}

IntrinsicRewards compute_intrinsic(const RankingParams& params, std::span<const double> state,
                                   std::span<const std::size_t> joint_action) {
  return compute_intrinsic(params.net, params.encode(state, joint_action));
}

double loss_mse(std::span<const double> sorted, const TargetSequence& targets) {
  if (sorted.size() != targets.size()) throw std::invalid_argument("loss_mse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double d = sorted[i] - targets.y[i];
    sum += d * d;
  }
  return sum / static_cast<double>(sorted.size());
}

double loss_var(std::span<const double> raw) {
  if (raw.empty()) throw std::invalid_argument("loss_var: empty input");
  const double n = static_cast<double>(raw.size());
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
  double sum = 0.0;
  for (double r : raw) sum += (r - mean) * (r - mean);
  return sum / n;
}

RankLoss rank_loss(const Mlp& net, std::span<const std::vector<double>> inputs, const TargetSequence& targets,
                   double beta1, double beta2) {
  if (inputs.empty()) throw std::invalid_argument("rank_loss: empty batch");
  if (net.output_size() != targets.size()) throw std::invalid_argument("rank_loss: target length mismatch");
  const std::size_t n = targets.size();
  const double inv_batch = 1.0 / static_cast<double>(inputs.size());
  const double inv_n = 1.0 / static_cast<double>(n);

  RankLoss out;
  out.grad = FlatGrad(net.parameter_count());
  MlpTape tape;
  std::vector<double> seed(n);
  for (const auto& x : inputs) {
    net.forward(x, tape);
    const IntrinsicRewards r = sort_rewards(std::vector<double>(tape.output().begin(), tape.output().end()));
    out.mean_mse += loss_mse(r.sorted, targets) * inv_batch;
    out.mean_var += loss_var(r.raw) * inv_batch;

    const double mean = std::accumulate(r.raw.begin(), r.raw.end(), 0.0) * inv_n;
    for (std::size_t i = 0; i < n; ++i) seed[i] = -beta2 * 2.0 * inv_n * (r.raw[i] - mean);
    for (std::size_t k = 0; k < n; ++k) seed[r.perm[k]] += beta1 * 2.0 * inv_n * (r.sorted[k] - targets.y[k]);
    net.backward_accumulate(tape, seed, out.grad.span(), inv_batch);
  }
  out.loss = beta1 * out.mean_mse - beta2 * out.mean_var;
  return out;
}

UpdateStatus update_eta_rank(Mlp& net, std::span<const std::vector<double>> inputs,
                             const TargetSequence& targets, double beta1, double beta2, double lr,
                             RankLoss* evaluated) {
  RankLoss loss = rank_loss(net, inputs, targets, beta1, beta2);
  UpdateStatus status = sgd_step(net.params(), loss.grad, lr, Direction::kDescent);
  if (evaluated) *evaluated = std::move(loss);
  return status;
}

}  // namespace codicon::ranking
