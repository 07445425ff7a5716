#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "codicon/harness/config.hpp"
#include "codicon/harness/evaluate.hpp"
#include "codicon/harness/params_io.hpp"
#include "codicon/harness/trainer.hpp"

using namespace codicon;
using namespace codicon::harness;

namespace {

env::PacmenEnv env_for(const std::string& map_path) {
  RunConfig config;
  config.map_path = map_path;
  return make_env(config);
}

JointPolicy policy_for(const std::string& path, bool sample, std::uint64_t seed) {
  if (!sample || ScriptedPolicy::is_scripted_file(path)) return load_policy_file(path);
  const ParamsBundle bundle = load_params(path);
  marl::PolicyParams policies;
  for (std::size_t a = 0; a < env::kNumAgents; ++a) {
    const Mlp* net = bundle.find_net("policy_" + std::to_string(a));
    if (!net) throw std::runtime_error(path + ": missing policy_" + std::to_string(a));
    policies.agents.push_back(*net);
  }
  return sampled_policy(std::move(policies), seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pac-Men multi-agent training with learned ranked intrinsic rewards"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train one seeded run");
  std::string config_path;
  std::optional<std::string> variant, out, map, assignment;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations, episodes;
  std::optional<double> lambda, alpha, beta, beta1, beta2, clip, gamma;
  bool no_eta = false, fresh = false, per_agent_penalty = false, no_early = false, quiet = false;
  std::vector<std::string> overrides;
  train->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  train->add_option("--variant", variant, "codicon | mappo | no-pri | no-var | no-rank");
  train->add_option("--seed", seed);
  train->add_option("--out", out, "Run directory (suffixed if it exists)");
  train->add_option("--map", map, "Map text file");
  train->add_option("--iterations", iterations);
  train->add_option("--episodes", episodes, "Episodes per iteration");
  train->add_option("--lambda", lambda, "Intrinsic reward weight");
  train->add_option("--alpha", alpha, "Policy learning rate");
  train->add_option("--beta", beta, "Reward-net learning rate");
  train->add_option("--beta1", beta1, "Target-matching loss weight");
  train->add_option("--beta2", beta2, "Variance loss weight");
  train->add_option("--clip", clip);
  train->add_option("--gamma", gamma);
  train->add_option("--assignment", assignment, "identity | positional");
  train->add_flag("--no-eta-updates", no_eta, "Freeze the reward net");
  train->add_flag("--fresh-meta-samples", fresh, "Meta step on a batch drawn from the updated policies");
  train->add_flag("--per-agent-penalty", per_agent_penalty);
  train->add_flag("--no-early-termination", no_early);
  train->add_option("--set", overrides, "section.key=value, applied last");
  train->add_flag("--quiet", quiet);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate saved parameters or a scripted policy");
  std::string params_path, eval_map;
  std::size_t eval_episodes = 10;
  std::uint64_t eval_seed = 0;
  bool sample = false, show_replay = false;
  std::string heatmap_out;
  eval->add_option("--params", params_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes);
  eval->add_option("--seed", eval_seed, "Only used with --sample");
  eval->add_option("--map", eval_map);
  eval->add_flag("--sample", sample, "Sample actions instead of argmax");
  eval->add_flag("--replay", show_replay, "Print the first episode frame by frame");
  eval->add_option("--heatmap", heatmap_out, "Write the visitation counts as CSV");

  // dump
  auto* dump = app.add_subcommand("dump", "Write global state and team reward per step as CSV");
  std::string dump_params, dump_map, dump_out;
  std::size_t dump_episodes = 1;
  dump->add_option("--params", dump_params)->required()->check(CLI::ExistingFile);
  dump->add_option("--episodes", dump_episodes);
  dump->add_option("--map", dump_map);
  dump->add_option("--out", dump_out, "Output file (default stdout)");

  // map
  auto* show_map = app.add_subcommand("map", "Print a map with its rooms and spawns");
  std::string render_map;
  show_map->add_option("--map", render_map);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      RunConfig config = config_path.empty() ? RunConfig{} : RunConfig::from_ini_file(config_path);
      if (variant) config.variant = parse_variant(*variant);
      if (seed) config.seed = *seed;
      if (out) config.out_dir = *out;
      if (map) config.map_path = *map;
      if (iterations) config.iterations = *iterations;
      if (episodes) config.episodes_per_iteration = *episodes;
      if (lambda) config.lambda = *lambda;
      if (alpha) config.alpha = *alpha;
      if (beta) config.beta = *beta;
      if (beta1) config.beta1 = *beta1;
      if (beta2) config.beta2 = *beta2;
      if (clip) config.clip = *clip;
      if (gamma) config.gamma = *gamma;
      if (assignment) config.set("reward.assignment", *assignment);
      if (no_eta) config.eta_updates = false;
      if (fresh) config.fresh_meta_samples = true;
      if (per_agent_penalty) config.per_agent_penalty = true;
      if (no_early) config.early_termination = false;
      for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got " + kv);
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      config.validate();
      const TrainingResult result = run_training(config, quiet);
      std::cout << result.run_dir << "\n";
      if (result.evaluation) std::cout << "eval mean return " << result.evaluation->mean_return << "\n";
      return result.exit_status;
    }
    if (*eval) {
      const env::PacmenEnv env = env_for(eval_map);
      const EvalSummary summary = evaluate_policy(env, policy_for(params_path, sample, eval_seed), eval_episodes);
      std::cout << "episodes     " << summary.episodes << "\n"
                << "mean return  " << summary.mean_return << "\n"
                << "max return   " << summary.max_return << "\n"
                << "mean length  " << summary.mean_length << "\n";
      std::cout << "dwell share by room (north east south west)\n";
      for (std::size_t a = 0; a < env::kNumAgents; ++a) {
        std::cout << "  agent " << a;
        for (env::Room room : env::kPeripheralRooms) std::cout << ' ' << summary.agent_room_share(env.map(), a, room);
        std::cout << "\n";
      }
      if (show_replay) std::cout << summary.replay;
      if (!heatmap_out.empty()) {
        std::ofstream f(heatmap_out);
        f << summary.visitation.to_csv();
      }
      return 0;
    }
    if (*dump) {
      const env::PacmenEnv env = env_for(dump_map);
      const JointPolicy policy = load_policy_file(dump_params);
      if (dump_out.empty()) {
        dump_state_rewards(env, policy, dump_episodes, std::cout);
      } else {
        std::ofstream f(dump_out);
        dump_state_rewards(env, policy, dump_episodes, f);
      }
      return 0;
    }
    if (*show_map) {
      const env::PacmenEnv env = env_for(render_map);
      std::cout << env::render_ascii(env.map(), env.reset());
      std::cout << env.map().initial_dots().size() << " dots\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
