#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "codicon/harness/config.hpp"
#include "codicon/harness/evaluate.hpp"
#include "codicon/harness/params_io.hpp"
#include "codicon/harness/scripted_policy.hpp"
#include "codicon/harness/trainer.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace codicon;
using namespace codicon::harness;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("codicon_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config(const fs::path& out) {
  RunConfig c;
  c.iterations = 4;
  c.episodes_per_iteration = 4;
  c.eval_episodes = 2;
  c.trace_every = 2;
  c.policy_hidden = {16};
  c.critic_hidden = {16};
  c.ranking_hidden = {16};
  c.out_dir = out.string();
  return c;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("config defaults, ini round trip and overrides") {
  const RunConfig d;
  CHECK(d.iterations == 2000);
  CHECK(d.episodes_per_iteration == 16);
  CHECK(d.lambda == 0.1);
  CHECK(d.beta == 1e-3);
  CHECK(d.beta1 == 1.0);
  CHECK(d.beta2 == 0.1);
  CHECK(d.clip == 0.2);
  CHECK(d.gamma == 0.99);
  CHECK(d.assignment == ranking::AssignmentMode::kIdentity);

  RunConfig c;
  c.variant = Variant::kNoVar;
  c.seed = 17;
  c.lambda = 0.35;
  c.policy_hidden = {32, 8};
  c.assignment = ranking::AssignmentMode::kPositional;
  c.fresh_meta_samples = true;
  c.early_termination = false;
  const RunConfig back = RunConfig::from_ini_string(c.to_ini());
  CHECK(back.to_ini() == c.to_ini());
  CHECK(back.variant == Variant::kNoVar);
  CHECK(back.policy_hidden == std::vector<std::size_t>{32, 8});
  CHECK(back.assignment == ranking::AssignmentMode::kPositional);

  const RunConfig partial = RunConfig::from_ini_string("[reward]\nlambda = 0.5\n[run]\nseed = 3\n");
  CHECK(partial.lambda == 0.5);
  CHECK(partial.seed == 3);
  CHECK(partial.alpha == d.alpha);

  RunConfig s;
  s.set("policy.alpha", "0.25");
  CHECK(s.alpha == 0.25);
  CHECK_THROWS_AS(s.set("policy.nonsense", "1"), ConfigError);
  CHECK_THROWS_AS(s.set("policy.alpha", "fast"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_ini_string("[policy]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_ini_file("/nonexistent/config.ini"), ConfigError);
  CHECK_THROWS_AS(parse_variant("ppo"), ConfigError);
  for (Variant v : {Variant::kCodicon, Variant::kMappo, Variant::kNoPri, Variant::kNoVar, Variant::kNoRank}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  RunConfig ok;
  CHECK_NOTHROW(ok.validate());
  bad([](RunConfig& c) { c.lambda = -0.1; });
  bad([](RunConfig& c) { c.alpha = 0.0; });
  bad([](RunConfig& c) { c.beta = -1.0; });
  bad([](RunConfig& c) { c.critic_lr = 0.0; });
  bad([](RunConfig& c) { c.clip = 1.0; });
  bad([](RunConfig& c) { c.clip = 0.0; });
  bad([](RunConfig& c) { c.gamma = 1.0; });
  bad([](RunConfig& c) { c.episodes_per_iteration = 0; });
}

TEST_CASE("variant semantics") {
  RunConfig c;
  c.variant = Variant::kMappo;
  RunConfig e = c.effective();
  CHECK(e.lambda == 0.0);
  CHECK_FALSE(e.eta_updates);
  c.variant = Variant::kNoPri;
  e = c.effective();
  CHECK(e.beta1 == 0.0);
  CHECK(e.beta2 == c.beta2);
  CHECK(e.eta_updates);
  c.variant = Variant::kNoVar;
  e = c.effective();
  CHECK(e.beta2 == 0.0);
  CHECK(e.beta1 == c.beta1);
  c.variant = Variant::kNoRank;
  e = c.effective();
  CHECK(e.beta1 == 0.0);
  CHECK(e.beta2 == 0.0);
  CHECK(e.lambda == c.lambda);
}

TEST_CASE("parameter files round trip bit-exactly") {
  const fs::path dir = scratch_dir("params");
  Rng rng(3);
  ParamsBundle b;
  b.nets.emplace_back("policy_0", Mlp::init_uniform({5, 4, 3}, rng));
  b.nets.emplace_back("ranking", Mlp::init_uniform({2, 2}, rng));
  b.vectors.emplace_back("targets", std::vector<double>{-0.5, 0.25, std::nextafter(1.0, 2.0)});
  const std::string path = (dir / "p.bin").string();
  save_params(path, b);
  CHECK(is_params_file(path));
  const ParamsBundle back = load_params(path);
  REQUIRE(back.nets.size() == 2);
  CHECK(back.find_net("policy_0")->layer_sizes() == std::vector<std::size_t>{5, 4, 3});
  CHECK(back.find_net("policy_0")->flatten() == b.nets[0].second.flatten());
  CHECK(back.find_net("ranking")->flatten() == b.nets[1].second.flatten());
  CHECK(*back.find_vector("targets") == b.vectors[0].second);
  CHECK(back.find_net("missing") == nullptr);

  // Little-endian magic and version header.
  const std::string raw = read_file(path);
  CHECK(raw.substr(0, 8) == "CDCNPRMS");
  CHECK(raw[8] == 1);

  std::ofstream(dir / "junk.bin") << "not a params file";
  CHECK_FALSE(is_params_file((dir / "junk.bin").string()));
  CHECK_THROWS(load_params((dir / "junk.bin").string()));
  CHECK_THROWS(load_params((dir / "missing.bin").string()));
  std::ofstream(dir / "trunc.bin", std::ios::binary) << raw.substr(0, raw.size() / 2);
  CHECK_THROWS(load_params((dir / "trunc.bin").string()));
}

TEST_CASE("scripted policies") {
  const ScriptedPolicy p = ScriptedPolicy::parse("codicon-scripted-policy 1\n# c\n0 UDS\n2 LR\n");
  CHECK(p.moves[0] == "UDS");
  CHECK(p.moves[1].empty());
  const env::JointAction a0 = p.act(0);
  CHECK(a0[0] == static_cast<std::size_t>(env::Action::kUp));
  CHECK(a0[1] == static_cast<std::size_t>(env::Action::kStay));
  CHECK(a0[2] == static_cast<std::size_t>(env::Action::kLeft));
  CHECK(p.act(10)[0] == static_cast<std::size_t>(env::Action::kStay));
  CHECK(ScriptedPolicy::parse(p.to_text()).moves == p.moves);
  CHECK_THROWS(ScriptedPolicy::parse("0 UD\n"));
  CHECK_THROWS(ScriptedPolicy::parse("codicon-scripted-policy 1\n0 UX\n"));
  CHECK_THROWS(ScriptedPolicy::parse("codicon-scripted-policy 1\n7 U\n"));

  const std::string fixture = std::string(CODICON_FIXTURES) + "/scripted_optimal.policy";
  CHECK(ScriptedPolicy::is_scripted_file(fixture));
  const env::PacmenEnv env(env::GridMap::default_map());
  const EvalSummary s = evaluate_policy(env, load_policy_file(fixture), 3);
  CHECK(s.mean_return == 25.75);
  CHECK(s.mean_dots_by_room[2] == 24.0);
  CHECK_THROWS(load_policy_file("/nonexistent/policy"));
}

TEST_CASE("evaluation of an untrained policy sits near the penalty floor") {
  RunConfig c;
  const Trainer t(c);
  const EvalSummary s = evaluate_policy(t.env(), greedy_policy(t.policies()), 5);
  CHECK(s.mean_return >= -4.25);
  CHECK(s.mean_return < 4.0);
  CHECK(s.returns.size() == 5);
  CHECK(s.visitation.height() == t.env().map().height());
  CHECK(s.visitation.width() == t.env().map().width());
  CHECK(s.visitation.total() == 5u * 18u * env::kNumAgents);
  CHECK_FALSE(s.replay.empty());

  const EvalSummary sampled = evaluate_policy(t.env(), sampled_policy(t.policies(), 4), 20);
  CHECK(sampled.mean_return < 8.0);
}

TEST_CASE("state-reward dump shape and reward column") {
  const env::PacmenEnv env(env::GridMap::default_map());
  const std::string fixture = std::string(CODICON_FIXTURES) + "/scripted_optimal.policy";
  std::stringstream out;
  const std::size_t rows = dump_state_rewards(env, load_policy_file(fixture), 2, out);
  CHECK(rows == 34);
  std::string line;
  double total = 0.0;
  std::size_t count = 0;
  while (std::getline(out, line)) {
    const auto cells = split(line, ',');
    REQUIRE(cells.size() == env.global_state_size() + 1);
    total += std::stod(cells.back());
    ++count;
  }
  CHECK(count == rows);
  CHECK(total == doctest::Approx(2 * 25.75));
}

TEST_CASE("reduction identity: lambda 0 without eta updates tracks the baseline bit for bit") {
  RunConfig base;
  base.seed = 7;
  RunConfig mappo = base;
  mappo.variant = Variant::kMappo;
  RunConfig reduced = base;
  reduced.variant = Variant::kCodicon;
  reduced.lambda = 0.0;
  reduced.eta_updates = false;
  Trainer a(mappo), b(reduced);
  for (int it = 0; it < 3; ++it) {
    const MetricRow ra = a.iterate();
    const MetricRow rb = b.iterate();
    CHECK(ra.to_csv() == rb.to_csv());
    CHECK(a.all_parameters() == b.all_parameters());
    CHECK(a.parameter_hash() == b.parameter_hash());
  }
  // Same seed with eta learning switched on diverges.
  RunConfig full = base;
  Trainer c(full);
  c.iterate();
  c.iterate();
  CHECK(c.ranking().net.flatten() != a.ranking().net.flatten());
}

TEST_CASE("targets never move during training") {
  RunConfig c = small_config(scratch_dir("targets"));
  Trainer t(c);
  const std::uint64_t fp = t.targets().fingerprint();
  for (int k = 0; k < 3; ++k) t.iterate();
  CHECK(t.targets().fingerprint() == fp);
}

TEST_CASE("run_training writes a complete, reproducible run directory") {
  const fs::path dir = scratch_dir("run");
  const RunConfig c = small_config(dir / "r");
  const TrainingResult first = run_training(c, true);
  const TrainingResult second = run_training(c, true);
  CHECK(first.exit_status == 0);
  CHECK(first.run_dir == (dir / "r").string());
  CHECK(second.run_dir == (dir / "r-1").string());
  for (const char* name : {"config.ini", "VERSION", "metrics.csv", "timing.csv", "params.bin", "heatmap.csv",
                           "intrinsic_trace.csv", "state_reward_dump.csv", "summary.json", "replay.txt"}) {
    CHECK(fs::exists(fs::path(first.run_dir) / name));
  }
  const std::string m1 = read_file(fs::path(first.run_dir) / "metrics.csv");
  CHECK(m1 == read_file(fs::path(second.run_dir) / "metrics.csv"));

  std::stringstream ms(m1);
  std::string line;
  std::getline(ms, line);
  CHECK(line == MetricRow::csv_header(env::kNumAgents));
  const std::size_t columns = split(line, ',').size();
  std::size_t rows = 0;
  while (std::getline(ms, line)) {
    const auto cells = split(line, ',');
    REQUIRE(cells.size() == columns);
    CHECK(std::stoul(cells[0]) == rows + 1);
    for (const auto& cell : cells) CHECK(std::isfinite(std::stod(cell)));
    ++rows;
  }
  CHECK(rows == c.iterations);

  // Heatmap: map height rows of width columns.
  std::stringstream hs(read_file(fs::path(first.run_dir) / "heatmap.csv"));
  std::size_t hrows = 0;
  while (std::getline(hs, line)) {
    CHECK(split(line, ',').size() == 21);
    ++hrows;
  }
  CHECK(hrows == 21);

  // Trace rows for iterations 1, 2, 4: header + 3 * (steps of episode 0) * agents.
  std::stringstream ts(read_file(fs::path(first.run_dir) / "intrinsic_trace.csv"));
  std::getline(ts, line);
  CHECK(line == "iteration,step,agent,intrinsic");
  std::size_t trace_rows = 0;
  while (std::getline(ts, line)) ++trace_rows;
  CHECK(trace_rows == 3 * 17 * env::kNumAgents);

  // Saved parameters reload into the same greedy behaviour.
  const ParamsBundle bundle = load_params((fs::path(first.run_dir) / "params.bin").string());
  CHECK(bundle.find_net("policy_3") != nullptr);
  CHECK(bundle.find_net("critic_hybrid_0") != nullptr);
  CHECK(bundle.find_net("critic_extrinsic") != nullptr);
  CHECK(bundle.find_net("ranking") != nullptr);
  CHECK(bundle.find_vector("targets")->size() == 4);
  const env::PacmenEnv env(env::GridMap::default_map());
  const EvalSummary re = evaluate_policy(env, load_policy_file((fs::path(first.run_dir) / "params.bin").string()), 2);
  CHECK(re.mean_return == first.evaluation->mean_return);
  CHECK(re.mean_return <= 25.75);

  const RunConfig stored = RunConfig::from_ini_file((fs::path(first.run_dir) / "config.ini").string());
  CHECK(stored.to_ini() == c.to_ini());
}

TEST_CASE("fresh meta samples and gae options run") {
  RunConfig c = small_config(scratch_dir("fresh"));
  c.fresh_meta_samples = true;
  c.gae_lambda = 0.9;
  Trainer t(c);
  const MetricRow r = t.iterate();
  CHECK(std::isfinite(r.meta_grad_norm));
  CHECK(r.meta_grad_norm > 0.0);
}

TEST_CASE("divergence checkpoints and exits nonzero") {
  const fs::path dir = scratch_dir("diverge");
  RunConfig c = small_config(dir / "r");
  c.critic_lr = 1e308;  // Adam moves every weight by about lr, so two steps overflow
  const TrainingResult res = run_training(c, true);
  CHECK(res.exit_status == 3);
  CHECK(fs::exists(fs::path(res.run_dir) / "checkpoint.bin"));
  const ParamsBundle saved = load_params((fs::path(res.run_dir) / "checkpoint.bin").string());
  for (const auto& [name, net] : saved.nets) {
    for (double v : net.params()) REQUIRE(std::isfinite(v));
  }
}
