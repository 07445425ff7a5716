#include <cmath>

#include "codicon/env/pacmen.hpp"
#include "codicon/gradkit/finite_diff.hpp"
#include "codicon/gradkit/sampling.hpp"
#include "codicon/marl/advantage.hpp"
#include "codicon/marl/critic.hpp"
#include "codicon/marl/policy.hpp"
#include "codicon/marl/ppo.hpp"
#include "codicon/marl/trajectory.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace codicon;
using namespace codicon::marl;
using codicon::testing::random_vector;
using codicon::testing::rel_error;
using codicon::testing::toy_batch;

namespace {

struct Fixture {
  env::PacmenEnv env{env::GridMap::default_map()};
  PolicyParams policies;
  CriticParams critics;
  ranking::RankingParams ranking;

  explicit Fixture(std::uint64_t seed) {
    Rng rng(seed);
    policies = PolicyParams::create(4, env.observation_size(), env::kNumActions, {16}, rng);
    critics = CriticParams::create(4, env.global_state_size(), {16}, rng);
    ranking = ranking::RankingParams::create(4, env::kNumActions, env.global_state_size(), {16}, rng);
  }
};

}  // namespace

TEST_CASE("collection: determinism, reward identity and returns") {
  Fixture f(1);
  CollectOptions opt;
  opt.episodes = 3;
  opt.lambda = 0.3;
  const TrajectoryBatch a = collect_trajectories(f.policies, f.ranking, f.env, opt, 42);
  const TrajectoryBatch b = collect_trajectories(f.policies, f.ranking, f.env, opt, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a.steps[t].actions == b.steps[t].actions);
    CHECK(a.steps[t].behavior_logp == b.steps[t].behavior_logp);
    CHECK(a.steps[t].hybrid == b.steps[t].hybrid);
  }
  CHECK(a.size() == 3 * env::kEpisodeLimit);
  CHECK(a.episodes.size() == 3);

  for (std::size_t t = 0; t < a.size(); ++t) {
    const StepRecord& s = a.steps[t];
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(s.hybrid[i] == s.extrinsic_reward + 0.3 * s.intrinsic[i]);
      CHECK(std::abs((s.hybrid[i] - s.extrinsic_reward) - 0.3 * s.intrinsic[i]) < 1e-15);
      // Behaviour log-prob is the current policy's.
      const auto logp = log_softmax(f.policies.agents[i].forward(s.observations[i]));
      CHECK(s.behavior_logp[i] == logp[s.actions[i]]);
    }
    if (!s.done) {
      const StepRecord& n = a.steps[t + 1];
      CHECK(std::abs(s.extrinsic_return - (s.extrinsic_reward + 0.99 * n.extrinsic_return)) < 1e-12);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(s.hybrid_return[i] - (s.hybrid[i] + 0.99 * n.hybrid_return[i])) < 1e-12);
      }
    } else {
      CHECK(s.extrinsic_return == s.extrinsic_reward);
    }
  }
  double ret = 0.0;
  for (std::size_t t = 0; t < a.size() && a.steps[t].episode == 0; ++t) ret += a.steps[t].extrinsic_reward;
  CHECK(ret == doctest::Approx(a.episodes[0].extrinsic_return));

  opt.lambda = 0.0;
  const TrajectoryBatch z = collect_trajectories(f.policies, f.ranking, f.env, opt, 7);
  for (const StepRecord& s : z.steps) {
    for (double h : s.hybrid) CHECK(h == s.extrinsic_reward);
  }
}

TEST_CASE("a policy that always stays scores the all-penalty floor") {
  Fixture f(2);
  for (Mlp& p : f.policies.agents) {
    std::fill(p.params().begin(), p.params().end(), 0.0);
    std::vector<double> bias(env::kNumActions, 0.0);
    bias[static_cast<std::size_t>(env::Action::kStay)] = 60.0;
    p.set_bias(p.num_weight_layers() - 1, bias);
  }
  const TrajectoryBatch b = collect_trajectories(f.policies, f.ranking, f.env, {.episodes = 1}, 3);
  CHECK(b.episodes[0].extrinsic_return == doctest::Approx(-4.25));
  CHECK(b.episodes[0].length == 17);
  CHECK(b.episodes[0].dots_eaten == 0);
}

TEST_CASE("positional assignment hands out sorted values") {
  Fixture f(3);
  CollectOptions opt;
  opt.episodes = 1;
  opt.assignment = ranking::AssignmentMode::kPositional;
  const TrajectoryBatch b = collect_trajectories(f.policies, f.ranking, f.env, opt, 5);
  for (const StepRecord& s : b.steps) {
    for (std::size_t i = 1; i < 4; ++i) CHECK(s.intrinsic[i - 1] <= s.intrinsic[i]);
  }
}

TEST_CASE("advantages: zero critic, perfect critic, pencil oracle") {
  Rng rng(4);
  TrajectoryBatch b = toy_batch(2, 2, 3, 5, rng, 0.5);
  b.steps[0].hybrid = {1.0, -2.0};
  b.steps[1].hybrid = {0.5, 3.0};
  b.steps[0].extrinsic_reward = 1.0;
  b.steps[1].extrinsic_reward = 2.0;

  const std::vector<double> zero(2, 0.0);
  CHECK(td_advantage(b, {1.0, 0.5}, zero, 0.0) == std::vector<double>{1.0, 0.5});

  // Pencil: A_0 = r_0 + g V_1 - V_0 = 1 + 0.5 * 4 - 3 = 0, A_1 = r_1 - V_1 = 0.5 - 4.
  CHECK(td_advantage(b, {1.0, 0.5}, {3.0, 4.0}, 0.0) == std::vector<double>{0.0, -3.5});
  // GAE with trace 0.5 * 0.5: A_0 = 0 + 0.25 * -3.5.
  const auto gae = td_advantage(b, {1.0, 0.5}, {3.0, 4.0}, 0.5);
  CHECK(gae[0] == doctest::Approx(-0.875));
  CHECK(gae[1] == doctest::Approx(-3.5));

  // Deterministic 1-step MDP with the exact value: advantage 0.
  TrajectoryBatch one = toy_batch(1, 1, 2, 5, rng);
  CHECK(td_advantage(one, {0.7}, {0.7}, 0.0)[0] == 0.0);

  // Critic nets with all-zero parameters give advantage = reward.
  CriticParams c;
  c.hybrid = {Mlp({3, 4, 1}), Mlp({3, 4, 1})};
  c.extrinsic = Mlp({3, 4, 1});
  const AdvantageRecord rec = compute_advantages(b, c);
  CHECK(rec.hybrid[0] == std::vector<double>{1.0, 0.5});
  CHECK(rec.hybrid[1] == std::vector<double>{-2.0, 3.0});
  CHECK(rec.extrinsic == std::vector<double>{1.0, 2.0});

  // Episode boundaries cut the bootstrap.
  TrajectoryBatch two = toy_batch(1, 4, 2, 5, rng, 0.5);
  two.steps[1].done = true;
  const auto cut = td_advantage(two, {1, 1, 1, 1}, {1, 1, 1, 1}, 0.0);
  CHECK(cut[1] == 0.0);  // 1 - 1, no bootstrap
  CHECK(cut[0] == 0.5);  // 1 + 0.5 - 1
}

TEST_CASE("clipped surrogate: ratio one, zero advantage, FD oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    Mlp policy = Mlp::init_uniform({4, 6, 5}, rng);
    TrajectoryBatch b = toy_batch(1, 3, 4, 5, rng);
    const auto adv = random_vector(3, rng, -2.0, 2.0);
    const double entropy_coef = trial % 2 ? 0.05 : 0.0;
    const SurrogateResult r = clipped_surrogate(policy, 0, b, adv, 0.2, true, entropy_coef);
    for (double p : r.ratios) {
      const double c = std::clamp(p, 0.8, 1.2);
      CHECK(c >= 0.8);
      CHECK(c <= 1.2);
    }
    const FlatGrad fd = finite_diff_grad(
        [&](std::span<const double> p) {
          Mlp probe = policy;
          probe.unflatten(p);
          const SurrogateResult s = clipped_surrogate(probe, 0, b, adv, 0.2, false, 0.0);
          return s.value + entropy_coef * s.entropy;
        },
        policy.params(), 1e-5);
    CHECK(rel_error(r.grad.values, fd.values) < 1e-4);

    // Ratio gradients match finite differences of p_s.
    for (std::size_t s = 0; s < 3; ++s) {
      const FlatGrad fdp = finite_diff_grad(
          [&](std::span<const double> p) {
            Mlp probe = policy;
            probe.unflatten(p);
            const auto logp = log_softmax(probe.forward(b.steps[s].observations[0]));
            return std::exp(logp[b.steps[s].actions[0]] - b.steps[s].behavior_logp[0]);
          },
          policy.params(), 1e-5);
      CHECK(rel_error(r.ratio_grads[s].values, fdp.values) < 1e-4);
    }
  }

  // At the behaviour policy every ratio is 1, every sample active, and the
  // gradient is mean A grad log pi.
  Mlp policy = Mlp::init_uniform({4, 6, 5}, rng);
  TrajectoryBatch b = toy_batch(1, 3, 4, 5, rng);
  for (StepRecord& s : b.steps) s.behavior_logp[0] = log_softmax(policy.forward(s.observations[0]))[s.actions[0]];
  const auto adv = random_vector(3, rng);
  const SurrogateResult r = clipped_surrogate(policy, 0, b, adv, 0.2);
  FlatGrad expect(policy.parameter_count());
  for (std::size_t s = 0; s < 3; ++s) {
    const auto p = softmax(policy.forward(b.steps[s].observations[0]));
    std::vector<double> seed(5);
    for (std::size_t k = 0; k < 5; ++k) seed[k] = (k == b.steps[s].actions[0] ? 1.0 : 0.0) - p[k];
    const FlatGrad g = policy.backward(b.steps[s].observations[0], seed);
    for (std::size_t k = 0; k < g.size(); ++k) expect[k] += adv[s] * g[k] / 3.0;
  }
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(r.ratios[s] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.active[s] == 1);
  }
  CHECK(rel_error(r.grad.values, expect.values) < 1e-12);

  const SurrogateResult z = clipped_surrogate(policy, 0, b, std::vector<double>(3, 0.0), 0.2);
  for (double g : z.grad.values) CHECK(g == 0.0);
}

TEST_CASE("ppo update: step size, cache and zero advantages") {
  Rng rng(6);
  PolicyParams policies = PolicyParams::create(2, 4, 5, {6}, rng);
  TrajectoryBatch b = toy_batch(2, 5, 4, 5, rng);
  const std::vector<std::vector<double>> adv{random_vector(5, rng), random_vector(5, rng)};
  const PolicyParams before = policies;
  PpoOptions opt;
  opt.lr = 0.3;
  const PpoResult res = ppo_policy_update(policies, b, adv, opt);
  REQUIRE(res.status.size() == 2);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(res.status[a].applied);
    const SurrogateResult s = clipped_surrogate(before.agents[a], a, b, adv[a], opt.clip);
    for (std::size_t k = 0; k < s.grad.size(); ++k) {
      CHECK(policies.agents[a].params()[k] ==
            doctest::Approx(before.agents[a].params()[k] + 0.3 * s.grad[k]).epsilon(1e-12));
    }
    CHECK(res.cache.ratio_grads[a].size() == 5);
    CHECK(res.cache.active[a] == s.active);
  }
  CHECK(res.cache.alpha == 0.3);
  CHECK(res.cache.weights == std::vector<double>(5, 0.2));

  PolicyParams still = before;
  ppo_policy_update(still, b, {std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)}, opt);
  for (std::size_t a = 0; a < 2; ++a) CHECK(still.agents[a].flatten() == before.agents[a].flatten());

  opt.keep_ratio_grads = false;
  PolicyParams light = before;
  const PpoResult lr = ppo_policy_update(light, b, adv, opt);
  CHECK(lr.cache.ratio_grads[0].empty());
  CHECK(lr.cache.active[0] == res.cache.active[0]);

  // A non-finite advantage rejects the step and clears the active flags.
  PolicyParams broken = before;
  auto bad = adv;
  bad[1][2] = std::nan("");
  const PpoResult br = ppo_policy_update(broken, b, bad, PpoOptions{});
  CHECK_FALSE(br.status[1].applied);
  CHECK(broken.agents[1].flatten() == before.agents[1].flatten());
  for (auto f : br.cache.active[1]) CHECK(f == 0);
}

TEST_CASE("critic regression") {
  Rng rng(7);
  TrajectoryBatch b = toy_batch(2, 6, 2, 5, rng);
  CriticParams critics = CriticParams::create(2, 3, {16}, rng);

  auto set_targets = [&](double c) {
    for (StepRecord& s : b.steps) {
      s.hybrid_return = {c, c};
      s.extrinsic_return = c;
    }
  };
  auto max_err = [&](double c) {
    double e = 0.0;
    for (const StepRecord& s : b.steps) {
      e = std::max(e, std::abs(critics.extrinsic.forward(s.state)[0] - c));
      for (const Mlp& h : critics.hybrid) e = std::max(e, std::abs(h.forward(s.state)[0] - c));
    }
    return e;
  };

  set_targets(0.0);
  critic_update(critics, b, {.lr = 1e-2, .epochs = 2000});
  CHECK(max_err(0.0) < 1e-2);

  set_targets(1.7);
  critic_update(critics, b, {.lr = 1e-3, .epochs = 2000});
  CHECK(max_err(1.7) < 1e-2);

  // Small steps on a fixed batch never increase the loss.
  for (std::size_t t = 0; t < b.size(); ++t) b.steps[t].extrinsic_return = rng.uniform(-2, 2);
  double prev = critic_update(critics, b, {.lr = 1e-4, .epochs = 1}).extrinsic;
  for (int k = 0; k < 50; ++k) {
    const double now = critic_update(critics, b, {.lr = 1e-4, .epochs = 1}).extrinsic;
    CHECK(now <= prev + 1e-15);
    prev = now;
  }
}
