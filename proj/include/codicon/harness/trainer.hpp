#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codicon/env/pacmen.hpp"
#include "codicon/harness/config.hpp"
#include "codicon/harness/evaluate.hpp"
#include "codicon/harness/params_io.hpp"
#include "codicon/marl/policy.hpp"
#include "codicon/marl/trajectory.hpp"
#include "codicon/ranking/ranking.hpp"

namespace codicon::harness {

struct MetricRow {
  std::size_t iteration = 0;
  std::size_t episodes_seen = 0;
  double mean_return = 0.0;
  double max_return = 0.0;
  double mean_length = 0.0;
  std::array<double, 4> dots_by_room{};  // north, east, south, west
  std::vector<double> intrinsic_mean;    // per agent
  double rank_loss = 0.0;
  double meta_grad_norm = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  double critic_loss_hybrid = 0.0;
  double critic_loss_extrinsic = 0.0;

  static std::string csv_header(std::size_t num_agents);
  std::string to_csv() const;
};

// Thrown when parameters stop being finite; the trainer keeps the state
// from before the failing iteration.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Trainer {
 public:
  // Applies the variant semantics of `config` (see RunConfig::effective).
  explicit Trainer(const RunConfig& config);

  MetricRow iterate();

  const RunConfig& config() const { return config_; }
  const env::PacmenEnv& env() const { return env_; }
  const marl::PolicyParams& policies() const { return policies_; }
  const marl::CriticParams& critics() const { return critics_; }
  const ranking::RankingParams& ranking() const { return ranking_; }
  const ranking::TargetSequence& targets() const { return targets_; }
  std::size_t iteration() const { return iteration_; }

  // Intrinsic rewards of the first episode of the last batch, as
  // (timestep, agent, value) triples.
  struct TracePoint {
    int step;
    std::size_t agent;
    double value;
  };
  const std::vector<TracePoint>& last_trace() const { return trace_; }

  ParamsBundle bundle() const;
  // FNV-1a over the bits of every parameter, policies first.
  std::uint64_t parameter_hash() const;
  // Every parameter in a fixed order, for bit-exact comparisons.
  std::vector<double> all_parameters() const;

 private:
  bool all_finite() const;

  RunConfig config_;
  env::PacmenEnv env_;
  marl::PolicyParams policies_;
  marl::CriticParams critics_;
  ranking::RankingParams ranking_;
  ranking::TargetSequence targets_;
  std::size_t iteration_ = 0;
  std::vector<TracePoint> trace_;
};

env::PacmenEnv make_env(const RunConfig& config);

// Picks `base`, or `base-1`, `base-2`, ... if it already exists.
std::string unique_run_dir(const std::string& base);

struct TrainingResult {
  int exit_status = 0;
  std::string run_dir;
  std::optional<EvalSummary> evaluation;
};

// Full run: trains for config.iterations, evaluates the greedy policies and
// writes the run directory. Exit status 0 on success, 3 on divergence.
TrainingResult run_training(const RunConfig& config, bool quiet = false);

// Short version identifier baked in at build time.
std::string version_stamp();

}  // namespace codicon::harness
