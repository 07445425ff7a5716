#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "codicon/ranking/ranking.hpp"

namespace codicon::harness {

enum class Variant { kCodicon, kMappo, kNoPri, kNoVar, kNoRank };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All hyperparameters of one training run.
//
// Stored as an INI file with sections [run], [env], [policy], [critic],
// [reward] and [meta]; see to_ini() for every key.
struct RunConfig {
  Variant variant = Variant::kCodicon;
  std::uint64_t seed = 0;
  std::size_t iterations = 2000;
  std::size_t episodes_per_iteration = 16;
  std::size_t eval_episodes = 10;
  std::size_t trace_every = 50;  // intrinsic_trace.csv sampling period, 0 = off
  std::string out_dir = "runs/codicon";

  std::string map_path;  // empty: built-in default map
  bool per_agent_penalty = false;
  bool early_termination = true;

  double alpha = 0.5;  // policy learning rate
  double clip = 0.2;
  double gamma = 0.99;
  double entropy_coef = 0.01;
  double gae_lambda = 0.0;
  bool normalize_advantages = false;
  std::vector<std::size_t> policy_hidden{64, 64};

  double critic_lr = 1e-2;
  int critic_epochs = 8;
  std::vector<std::size_t> critic_hidden{64, 64};

  double lambda = 0.1;   // intrinsic weight in the hybrid reward
  double beta = 1e-3;    // reward-net learning rate (rank and meta steps)
  double beta1 = 1.0;    // MSE-to-target weight
  double beta2 = 0.1;    // variance weight
  ranking::AssignmentMode assignment = ranking::AssignmentMode::kIdentity;
  std::vector<std::size_t> ranking_hidden{64, 64};

  bool eta_updates = true;
  bool fresh_meta_samples = false;

  static RunConfig from_ini_file(const std::string& path);
  static RunConfig from_ini_string(const std::string& text);

  // Sets one "section.key" entry; throws ConfigError on unknown keys or
  // unparsable values.
  void set(const std::string& dotted_key, const std::string& value);

  std::string to_ini() const;

  // Copy with the variant's semantics applied: mappo => lambda = 0 and no eta
  // updates; no-pri => beta1 = 0; no-var => beta2 = 0; no-rank => both 0.
  RunConfig effective() const;

  // Throws ConfigError when a value is out of range.
  void validate() const;
};

}  // namespace codicon::harness
