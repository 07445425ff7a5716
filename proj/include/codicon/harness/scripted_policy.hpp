#pragma once

#include <array>
#include <string>

#include "codicon/env/pacmen.hpp"

namespace codicon::harness {

// Open-loop action script per agent.
//
// Text format:
//   codicon-scripted-policy 1
//   <agent id> <moves>
// with one line per agent and moves drawn from U, D, L, R, S (stay). Steps
// past the end of an agent's script are stays. '#' starts a comment line.
struct ScriptedPolicy {
  std::array<std::string, env::kNumAgents> moves;

  static ScriptedPolicy parse(const std::string& text);
  static ScriptedPolicy load(const std::string& path);
  static bool is_scripted_file(const std::string& path);

  std::string to_text() const;
  env::JointAction act(int timestep) const;
};

}  // namespace codicon::harness
