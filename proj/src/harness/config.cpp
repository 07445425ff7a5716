#include "codicon/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

namespace codicon::harness {
namespace {

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + s + "'");
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& s) {
  std::vector<std::size_t> out;
  std::istringstream in(s);
  for (std::string tok; std::getline(in, tok, ',');) {
    if (tok.empty()) continue;
    out.push_back(static_cast<std::size_t>(to_u64(key, tok)));
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kCodicon: return "codicon";
    case Variant::kMappo: return "mappo";
    case Variant::kNoPri: return "no-pri";
    case Variant::kNoVar: return "no-var";
    case Variant::kNoRank: return "no-rank";
  }
  return "codicon";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kCodicon, Variant::kMappo, Variant::kNoPri, Variant::kNoVar, Variant::kNoRank}) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "run.variant") variant = parse_variant(value);
  else if (key == "run.seed") seed = to_u64(key, value);
  else if (key == "run.iterations") iterations = to_u64(key, value);
  else if (key == "run.episodes") episodes_per_iteration = to_u64(key, value);
  else if (key == "run.eval_episodes") eval_episodes = to_u64(key, value);
  else if (key == "run.trace_every") trace_every = to_u64(key, value);
  else if (key == "run.out") out_dir = value;
  else if (key == "env.map") map_path = value;
  else if (key == "env.per_agent_penalty") per_agent_penalty = to_bool(key, value);
  else if (key == "env.early_termination") early_termination = to_bool(key, value);
  else if (key == "policy.alpha") alpha = to_double(key, value);
  else if (key == "policy.clip") clip = to_double(key, value);
  else if (key == "policy.gamma") gamma = to_double(key, value);
  else if (key == "policy.entropy_coef") entropy_coef = to_double(key, value);
  else if (key == "policy.gae_lambda") gae_lambda = to_double(key, value);
  else if (key == "policy.normalize_advantages") normalize_advantages = to_bool(key, value);
  else if (key == "policy.hidden") policy_hidden = to_sizes(key, value);
  else if (key == "critic.lr") critic_lr = to_double(key, value);
  else if (key == "critic.epochs") critic_epochs = static_cast<int>(to_u64(key, value));
  else if (key == "critic.hidden") critic_hidden = to_sizes(key, value);
  else if (key == "reward.lambda") lambda = to_double(key, value);
  else if (key == "reward.beta") beta = to_double(key, value);
  else if (key == "reward.beta1") beta1 = to_double(key, value);
  else if (key == "reward.beta2") beta2 = to_double(key, value);
  else if (key == "reward.hidden") ranking_hidden = to_sizes(key, value);
  else if (key == "reward.assignment") {
    if (value == "identity") assignment = ranking::AssignmentMode::kIdentity;
    else if (value == "positional") assignment = ranking::AssignmentMode::kPositional;
    else throw ConfigError("reward.assignment must be identity or positional");
  } else if (key == "meta.eta_updates") eta_updates = to_bool(key, value);
  else if (key == "meta.fresh_samples") fresh_meta_samples = to_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::from_ini_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw ConfigError("config key '" + section + "' outside any section");
    for (const auto& [key, node] : entries) cfg.set(section + "." + key, node.get_value<std::string>());
  }
  return cfg;
}

RunConfig RunConfig::from_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_ini_string(buf.str());
}

std::string RunConfig::to_ini() const {
  std::ostringstream o;
  o << "[run]\n"
    << "variant = " << variant_name(variant) << "\n"
    << "seed = " << seed << "\n"
    << "iterations = " << iterations << "\n"
    << "episodes = " << episodes_per_iteration << "\n"
    << "eval_episodes = " << eval_episodes << "\n"
    << "trace_every = " << trace_every << "\n"
    << "out = " << out_dir << "\n\n"
    << "[env]\n"
    << "map = " << map_path << "\n"
    << "per_agent_penalty = " << (per_agent_penalty ? "true" : "false") << "\n"
    << "early_termination = " << (early_termination ? "true" : "false") << "\n\n"
    << "[policy]\n"
    << "alpha = " << format_double(alpha) << "\n"
    << "clip = " << format_double(clip) << "\n"
    << "gamma = " << format_double(gamma) << "\n"
    << "entropy_coef = " << format_double(entropy_coef) << "\n"
    << "gae_lambda = " << format_double(gae_lambda) << "\n"
    << "normalize_advantages = " << (normalize_advantages ? "true" : "false") << "\n"
    << "hidden = " << join(policy_hidden) << "\n\n"
    << "[critic]\n"
    << "lr = " << format_double(critic_lr) << "\n"
    << "epochs = " << critic_epochs << "\n"
    << "hidden = " << join(critic_hidden) << "\n\n"
    << "[reward]\n"
    << "lambda = " << format_double(lambda) << "\n"
    << "beta = " << format_double(beta) << "\n"
    << "beta1 = " << format_double(beta1) << "\n"
    << "beta2 = " << format_double(beta2) << "\n"
    << "assignment = " << (assignment == ranking::AssignmentMode::kIdentity ? "identity" : "positional") << "\n"
    << "hidden = " << join(ranking_hidden) << "\n\n"
    << "[meta]\n"
    << "eta_updates = " << (eta_updates ? "true" : "false") << "\n"
    << "fresh_samples = " << (fresh_meta_samples ? "true" : "false") << "\n";
  return o.str();
}

RunConfig RunConfig::effective() const {
  RunConfig c = *this;
  switch (variant) {
    case Variant::kCodicon: break;
    case Variant::kMappo:
      c.lambda = 0.0;
      c.eta_updates = false;
      break;
    case Variant::kNoPri: c.beta1 = 0.0; break;
    case Variant::kNoVar: c.beta2 = 0.0; break;
    case Variant::kNoRank:
      c.beta1 = 0.0;
      c.beta2 = 0.0;
      break;
  }
  return c;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(lambda >= 0.0, "lambda must be >= 0");
  require(alpha > 0.0, "policy.alpha must be > 0");
  require(beta > 0.0, "reward.beta must be > 0");
  require(critic_lr > 0.0, "critic.lr must be > 0");
  require(clip > 0.0 && clip < 1.0, "policy.clip must lie in (0, 1)");
  require(gamma >= 0.0 && gamma < 1.0, "policy.gamma must lie in [0, 1)");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, "policy.gae_lambda must lie in [0, 1]");
  require(beta1 >= 0.0 && beta2 >= 0.0, "beta1 and beta2 must be >= 0");
  require(entropy_coef >= 0.0, "entropy_coef must be >= 0");
  require(episodes_per_iteration > 0, "run.episodes must be > 0");
  require(critic_epochs >= 0, "critic.epochs must be >= 0");
  require(!policy_hidden.empty() && !critic_hidden.empty() && !ranking_hidden.empty(),
          "hidden layer lists must not be empty");
}

}  // namespace codicon::harness
