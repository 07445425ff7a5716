#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codicon/env/grid_map.hpp"

namespace codicon::env {

inline constexpr std::size_t kNumActions = 5;
inline constexpr int kEpisodeLimit = 17;
inline constexpr int kViewRadius = 2;  // 5x5 egocentric window
inline constexpr int kViewSide = 2 * kViewRadius + 1;

enum class Action : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };

using JointAction = std::array<std::size_t, kNumAgents>;

struct EnvOptions {
  double dot_reward = 1.0;
  double step_penalty = 0.25;
  // Charge the step penalty once per agent instead of once per team.
  bool per_agent_penalty = false;
  // End the episode as soon as the last dot is eaten.
  bool early_termination = true;
};

struct EnvState {
  std::array<Cell, kNumAgents> agent_positions{};
  std::uint64_t remaining_dots = 0;  // bit k set <=> initial_dots()[k] still present
  int timestep = 0;

  bool operator==(const EnvState&) const = default;
};

struct StepOutcome {
  EnvState next_state;
  double team_reward = 0.0;
  bool done = false;
  int dots_eaten_this_step = 0;
  std::uint64_t eaten_mask = 0;
};

// Observation layout: four kViewSide^2 channels (walls, dots, other agents,
// out of bounds), then row/col of the agent normalized to [0, 1], then
// timestep / kEpisodeLimit.
struct Observation {
  std::size_t agent_id = 0;
  std::vector<double> features;
};

class PacmenEnv {
 public:
  explicit PacmenEnv(GridMap map, EnvOptions options = {});

  const GridMap& map() const { return map_; }
  const EnvOptions& options() const { return options_; }

  // The seed is unused: spawns and dots are fixed by the map.
  EnvState reset(std::uint64_t seed = 0) const;

  // Throws std::logic_error on a finished state, std::invalid_argument on a
  // bad action index.
  StepOutcome step(const EnvState& state, const JointAction& joint_action) const;

  bool is_done(const EnvState& state) const;

  Observation observe(const EnvState& state, std::size_t agent_id) const;
  std::vector<double> global_state(const EnvState& state) const;

  std::size_t observation_size() const { return 4 * kViewSide * kViewSide + 3; }
  std::size_t global_state_size() const { return 2 * kNumAgents + map_.initial_dots().size() + 1; }

  std::uint64_t all_dots_mask() const { return all_dots_; }
  // Dots of `mask` lying in `room`.
  int count_in_room(std::uint64_t mask, Room room) const;

 private:
  Cell apply(Cell from, std::size_t action) const;

  GridMap map_;
  EnvOptions options_;
  std::uint64_t all_dots_ = 0;
  std::array<std::uint64_t, 7> room_masks_{};
};

std::string render_ascii(const GridMap& map, const EnvState& state);

}  // namespace codicon::env
