#include "codicon/harness/trainer.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "codicon/marl/advantage.hpp"
#include "codicon/marl/critic.hpp"
#include "codicon/marl/ppo.hpp"
#include "codicon/meta/metagrad.hpp"

#ifndef CODICON_VERSION
#define CODICON_VERSION "unknown"
#endif

namespace codicon::harness {
namespace fs = std::filesystem;

namespace {

// Independent RNG streams per concern, so turning one part of the algorithm
// off never shifts the draws of another.
enum Stream : std::uint64_t {
  kPolicyInit = 1,
  kCriticInit = 2,
  kRankingInit = 3,
  kTargets = 4,
  kCollect = 5,
  kFreshMeta = 6,
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string version_stamp() { return CODICON_VERSION; }

std::string MetricRow::csv_header(std::size_t num_agents) {
  std::string h =
      "iteration,episodes_seen,mean_return,max_return,mean_length,dots_north,dots_east,dots_south,dots_west";
  for (std::size_t a = 0; a < num_agents; ++a) h += ",intrinsic_mean_" + std::to_string(a);
  h += ",rank_loss,meta_grad_norm,clip_fraction,entropy,critic_loss_hybrid,critic_loss_extrinsic";
  return h;
}

std::string MetricRow::to_csv() const {
  std::string row = std::to_string(iteration) + "," + std::to_string(episodes_seen) + "," + fmt(mean_return) + "," +
                    fmt(max_return) + "," + fmt(mean_length);
  for (double d : dots_by_room) row += "," + fmt(d);
  for (double r : intrinsic_mean) row += "," + fmt(r);
  for (double v : {rank_loss, meta_grad_norm, clip_fraction, entropy, critic_loss_hybrid, critic_loss_extrinsic}) {
    row += "," + fmt(v);
  }
  return row;
}

env::PacmenEnv make_env(const RunConfig& config) {
  env::EnvOptions options;
  options.per_agent_penalty = config.per_agent_penalty;
  options.early_termination = config.early_termination;
  return env::PacmenEnv(config.map_path.empty() ? env::GridMap::default_map() : env::GridMap::load(config.map_path),
                        options);
}

Trainer::Trainer(const RunConfig& config) : config_(config.effective()), env_(make_env(config_)) {
  config_.validate();
  const std::size_t n = env::kNumAgents;
  Rng policy_rng(derive_seed(config_.seed, kPolicyInit));
  policies_ = marl::PolicyParams::create(n, env_.observation_size(), env::kNumActions, config_.policy_hidden,
                                         policy_rng);
  Rng critic_rng(derive_seed(config_.seed, kCriticInit));
  critics_ = marl::CriticParams::create(n, env_.global_state_size(), config_.critic_hidden, critic_rng);
  Rng ranking_rng(derive_seed(config_.seed, kRankingInit));
  ranking_ = ranking::RankingParams::create(n, env::kNumActions, env_.global_state_size(), config_.ranking_hidden,
                                            ranking_rng);
  Rng target_rng(derive_seed(config_.seed, kTargets));
  targets_ = ranking::init_targets(n, target_rng);
}

MetricRow Trainer::iterate() {
  const marl::PolicyParams policies_before = policies_;
  const marl::CriticParams critics_before = critics_;
  const ranking::RankingParams ranking_before = ranking_;

  const std::size_t it = iteration_;
  marl::CollectOptions collect;
  collect.episodes = config_.episodes_per_iteration;
  collect.lambda = config_.lambda;
  collect.gamma = config_.gamma;
  collect.assignment = config_.assignment;

  MetricRow row;
  row.iteration = it + 1;
  row.episodes_seen = (it + 1) * config_.episodes_per_iteration;
  try {
    marl::TrajectoryBatch batch =
        marl::collect_trajectories(policies_, ranking_, env_, collect, derive_seed(derive_seed(config_.seed, kCollect), it));
    marl::compute_returns(batch);
    const marl::AdvantageRecord adv = marl::compute_advantages(batch, critics_, config_.gae_lambda);

    marl::PpoOptions ppo_options;
    ppo_options.lr = config_.alpha;
    ppo_options.clip = config_.clip;
    ppo_options.entropy_coef = config_.entropy_coef;
    ppo_options.normalize_advantages = config_.normalize_advantages;
    ppo_options.keep_cache = config_.eta_updates;
    ppo_options.keep_ratio_grads = false;
    marl::PpoResult ppo = marl::ppo_policy_update(policies_, batch, adv.hybrid, ppo_options);
    row.clip_fraction = ppo.clip_fraction;
    row.entropy = ppo.entropy;

    std::vector<std::vector<double>> inputs;
    inputs.reserve(batch.size());
    for (const marl::StepRecord& s : batch.steps) inputs.push_back(s.ranking_input);

    if (config_.eta_updates) {
      ranking::RankLoss rank;
      ranking::update_eta_rank(ranking_.net, inputs, targets_, config_.beta1, config_.beta2, config_.beta, &rank);
      row.rank_loss = rank.loss;

      std::vector<FlatGrad> g_ex;
      if (config_.fresh_meta_samples) {
        marl::TrajectoryBatch fresh = marl::collect_trajectories(
            policies_, ranking_, env_, collect, derive_seed(derive_seed(config_.seed, kFreshMeta), it));
        marl::compute_returns(fresh);
        g_ex = meta::extrinsic_policy_grad(policies_, fresh,
                                           marl::extrinsic_advantage(fresh, critics_, config_.gae_lambda),
                                           config_.clip);
      } else {
        g_ex = meta::extrinsic_policy_grad(policies_, batch, adv.extrinsic, config_.clip);
      }
      const meta::MetaGrad mg = meta::meta_gradient_streaming(batch, policies_before, ppo.cache, ranking_.net,
                                                              config_.lambda, config_.gamma * config_.gae_lambda, g_ex);
      row.meta_grad_norm = mg.values.norm();
      meta::update_eta_meta(ranking_.net, mg, config_.beta);
    } else {
      row.rank_loss = ranking::rank_loss(ranking_.net, inputs, targets_, config_.beta1, config_.beta2).loss;
    }

    marl::CriticOptions critic_options;
    critic_options.lr = config_.critic_lr;
    critic_options.epochs = config_.critic_epochs;
    const marl::CriticLoss closs = marl::critic_update(critics_, batch, critic_options);
    row.critic_loss_hybrid = closs.hybrid;
    row.critic_loss_extrinsic = closs.extrinsic;

    const double episodes = static_cast<double>(batch.episodes.size());
    row.max_return = batch.episodes.front().extrinsic_return;
    for (const marl::EpisodeSummary& e : batch.episodes) {
      row.mean_return += e.extrinsic_return / episodes;
      row.max_return = std::max(row.max_return, e.extrinsic_return);
      row.mean_length += e.length / episodes;
      for (std::size_t r = 0; r < 4; ++r) row.dots_by_room[r] += e.dots_by_room[r] / episodes;
    }
    row.intrinsic_mean.assign(batch.num_agents, 0.0);
    for (const marl::StepRecord& s : batch.steps) {
      for (std::size_t a = 0; a < batch.num_agents; ++a) {
        row.intrinsic_mean[a] += s.intrinsic[a] / static_cast<double>(batch.size());
      }
    }
    trace_.clear();
    for (const marl::StepRecord& s : batch.steps) {
      if (s.episode != 0) break;
      for (std::size_t a = 0; a < batch.num_agents; ++a) trace_.push_back({s.timestep, a, s.intrinsic[a]});
    }
  } catch (const std::runtime_error& e) {
    policies_ = policies_before;
    critics_ = critics_before;
    ranking_ = ranking_before;
    throw DivergenceError("iteration " + std::to_string(it + 1) + ": " + e.what());
  }
  // Individual updates skip non-finite gradients, so a blow-up shows up in the losses first.
  const bool losses_finite = std::isfinite(row.rank_loss) && std::isfinite(row.entropy) &&
                             std::isfinite(row.critic_loss_hybrid) && std::isfinite(row.critic_loss_extrinsic) &&
                             std::isfinite(row.meta_grad_norm);
  if (!losses_finite || !all_finite()) {
    policies_ = policies_before;
    critics_ = critics_before;
    ranking_ = ranking_before;
    throw DivergenceError("iteration " + std::to_string(it + 1) + ": non-finite parameters or losses");
  }
  ++iteration_;
  return row;
}

bool Trainer::all_finite() const {
  for (double v : all_parameters()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> Trainer::all_parameters() const {
  std::vector<double> out;
  auto append = [&out](const Mlp& net) { out.insert(out.end(), net.params().begin(), net.params().end()); };
  for (const Mlp& p : policies_.agents) append(p);
  for (const Mlp& c : critics_.hybrid) append(c);
  append(critics_.extrinsic);
  append(ranking_.net);
  return out;
}

std::uint64_t Trainer::parameter_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : all_parameters()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

ParamsBundle Trainer::bundle() const {
  ParamsBundle b;
  for (std::size_t a = 0; a < policies_.agents.size(); ++a) {
    b.nets.emplace_back("policy_" + std::to_string(a), policies_.agents[a]);
  }
  for (std::size_t a = 0; a < critics_.hybrid.size(); ++a) {
    b.nets.emplace_back("critic_hybrid_" + std::to_string(a), critics_.hybrid[a]);
  }
  b.nets.emplace_back("critic_extrinsic", critics_.extrinsic);
  b.nets.emplace_back("ranking", ranking_.net);
  b.vectors.emplace_back("targets", targets_.y);
  return b;
}

std::string unique_run_dir(const std::string& base) {
  if (!fs::exists(base)) return base;
  for (int k = 1;; ++k) {
    std::string candidate = base + "-" + std::to_string(k);
    if (!fs::exists(candidate)) return candidate;
  }
}

TrainingResult run_training(const RunConfig& config, bool quiet) {
  TrainingResult result;
  Trainer trainer(config);
  const fs::path dir = unique_run_dir(config.out_dir);
  fs::create_directories(dir);
  result.run_dir = dir.string();

  write_text(dir / "config.ini", config.to_ini());
  write_text(dir / "VERSION", version_stamp() + "\n");

  std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
  std::ofstream timing(dir / "timing.csv", std::ios::binary);
  std::ofstream trace(dir / "intrinsic_trace.csv", std::ios::binary);
  metrics << MetricRow::csv_header(env::kNumAgents) << '\n';
  timing << "iteration,seconds\n";
  trace << "iteration,step,agent,intrinsic\n";

  const auto start = std::chrono::steady_clock::now();
  const std::size_t iterations = trainer.config().iterations;
  for (std::size_t it = 0; it < iterations; ++it) {
    MetricRow row;
    try {
      row = trainer.iterate();
    } catch (const DivergenceError& e) {
      std::cerr << "diverged: " << e.what() << "\n";
      save_params((dir / "checkpoint.bin").string(), trainer.bundle());
      result.exit_status = 3;
      return result;
    }
    metrics << row.to_csv() << '\n';
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timing << row.iteration << ',' << fmt(seconds) << '\n';
    const std::size_t every = trainer.config().trace_every;
    if (every > 0 && (row.iteration % every == 0 || row.iteration == 1)) {
      for (const Trainer::TracePoint& p : trainer.last_trace()) {
        trace << row.iteration << ',' << p.step << ',' << p.agent << ',' << fmt(p.value) << '\n';
      }
    }
    if (!quiet && (row.iteration % 100 == 0 || row.iteration == iterations)) {
      std::cerr << "iter " << row.iteration << " return " << fmt(row.mean_return) << " south "
                << fmt(row.dots_by_room[2]) << " (" << fmt(seconds) << " s)\n";
    }
  }
  metrics.close();

  save_params((dir / "params.bin").string(), trainer.bundle());

  const JointPolicy greedy = greedy_policy(trainer.policies());
  EvalSummary eval = evaluate_policy(trainer.env(), greedy, trainer.config().eval_episodes);
  write_text(dir / "heatmap.csv", eval.visitation.to_csv());
  write_text(dir / "replay.txt", eval.replay);
  {
    std::ofstream dump(dir / "state_reward_dump.csv", std::ios::binary);
    dump_state_rewards(trainer.env(), greedy, trainer.config().eval_episodes, dump);
  }

  nlohmann::json summary;
  summary["variant"] = variant_name(trainer.config().variant);
  summary["seed"] = trainer.config().seed;
  summary["iterations"] = iterations;
  summary["eval_mean_return"] = eval.mean_return;
  summary["eval_max_return"] = eval.max_return;
  summary["eval_mean_length"] = eval.mean_length;
  summary["eval_dots_by_room"] = eval.mean_dots_by_room;
  nlohmann::json shares = nlohmann::json::array();
  for (std::size_t a = 0; a < env::kNumAgents; ++a) {
    nlohmann::json s;
    for (env::Room room : env::kPeripheralRooms) s[std::string(env::room_name(room))] = eval.agent_room_share(trainer.env().map(), a, room);
    shares.push_back(s);
  }
  summary["agent_room_share"] = shares;
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  result.evaluation = std::move(eval);
  return result;
}

}  // namespace codicon::harness
