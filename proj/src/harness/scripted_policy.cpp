#include "codicon/harness/scripted_policy.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace codicon::harness {
namespace {

constexpr std::string_view kHeader = "codicon-scripted-policy 1";

std::size_t letter_to_action(char c) {
  switch (c) {
    case 'U': return static_cast<std::size_t>(env::Action::kUp);
    case 'D': return static_cast<std::size_t>(env::Action::kDown);
    case 'L': return static_cast<std::size_t>(env::Action::kLeft);
    case 'R': return static_cast<std::size_t>(env::Action::kRight);
    case 'S': return static_cast<std::size_t>(env::Action::kStay);
  }
  throw std::runtime_error(std::string("scripted policy: unknown move '") + c + "'");
}

}  // namespace

ScriptedPolicy ScriptedPolicy::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header = false;
  ScriptedPolicy p;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kHeader) throw std::runtime_error("scripted policy: missing header");
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::size_t agent = 0;
    std::string moves;
    if (!(fields >> agent) || agent >= env::kNumAgents) throw std::runtime_error("scripted policy: bad agent line");
    fields >> moves;
    for (char c : moves) letter_to_action(c);
    p.moves[agent] = moves;
  }
  if (!header) throw std::runtime_error("scripted policy: missing header");
  return p;
}

ScriptedPolicy ScriptedPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scripted policy " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool ScriptedPolicy::is_scripted_file(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return line == kHeader;
  }
  return false;
}

std::string ScriptedPolicy::to_text() const {
  std::string out(kHeader);
  out += "\n";
  for (std::size_t a = 0; a < moves.size(); ++a) out += std::to_string(a) + " " + moves[a] + "\n";
  return out;
}

env::JointAction ScriptedPolicy::act(int timestep) const {
  env::JointAction joint{};
  for (std::size_t a = 0; a < env::kNumAgents; ++a) {
    const auto t = static_cast<std::size_t>(timestep);
    joint[a] = t < moves[a].size() ? letter_to_action(moves[a][t]) : static_cast<std::size_t>(env::Action::kStay);
  }
  return joint;
}

}  // namespace codicon::harness
