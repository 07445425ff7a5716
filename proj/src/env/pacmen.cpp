#include "codicon/env/pacmen.hpp"

#include <bit>
#include <stdexcept>

namespace codicon::env {

PacmenEnv::PacmenEnv(GridMap map, EnvOptions options) : map_(std::move(map)), options_(options) {
  const auto& dots = map_.initial_dots();
  all_dots_ = dots.size() == 64 ? ~0ULL : ((1ULL << dots.size()) - 1);
  for (std::size_t k = 0; k < dots.size(); ++k) {
    room_masks_[static_cast<std::size_t>(map_.room_at(dots[k]))] |= 1ULL << k;
  }
}

EnvState PacmenEnv::reset(std::uint64_t /*seed*/) const {
  EnvState s;
  s.agent_positions = map_.spawn_positions();
  s.remaining_dots = all_dots_;
  s.timestep = 0;
  return s;
}

bool PacmenEnv::is_done(const EnvState& state) const {
  return state.timestep >= kEpisodeLimit || (options_.early_termination && state.remaining_dots == 0);
}

Cell PacmenEnv::apply(Cell from, std::size_t action) const {
  Cell to = from;
  switch (static_cast<Action>(action)) {
    case Action::kUp: --to.row; break;
    case Action::kDown: ++to.row; break;
    case Action::kLeft: --to.col; break;
    case Action::kRight: ++to.col; break;
    case Action::kStay: break;
  }
  if (!map_.in_bounds(to) || map_.is_wall(to)) return from;
  return to;
}

StepOutcome PacmenEnv::step(const EnvState& state, const JointAction& joint_action) const {
  if (is_done(state)) throw std::logic_error("PacmenEnv::step called on a finished episode");
  StepOutcome out;
  out.next_state = state;
  for (std::size_t a = 0; a < kNumAgents; ++a) {
    if (joint_action[a] >= kNumActions) {
      throw std::invalid_argument("action index " + std::to_string(joint_action[a]) + " out of range");
    }
    const Cell next = apply(state.agent_positions[a], joint_action[a]);
    out.next_state.agent_positions[a] = next;
    const int d = map_.dot_index(next);
    if (d >= 0) out.eaten_mask |= (1ULL << d) & state.remaining_dots;
  }
  out.next_state.remaining_dots = state.remaining_dots & ~out.eaten_mask;
  out.next_state.timestep = state.timestep + 1;
  out.dots_eaten_this_step = std::popcount(out.eaten_mask);
  const double penalty = options_.per_agent_penalty ? options_.step_penalty * kNumAgents : options_.step_penalty;
  out.team_reward = out.dots_eaten_this_step * options_.dot_reward - penalty;
  out.done = is_done(out.next_state);
  return out;
}

Observation PacmenEnv::observe(const EnvState& state, std::size_t agent_id) const {
  if (agent_id >= kNumAgents) throw std::invalid_argument("agent id out of range");
  constexpr std::size_t kPlane = kViewSide * kViewSide;
  Observation obs;
  obs.agent_id = agent_id;
  obs.features.assign(observation_size(), 0.0);
  const Cell self = state.agent_positions[agent_id];
  for (int dr = -kViewRadius; dr <= kViewRadius; ++dr) {
    for (int dc = -kViewRadius; dc <= kViewRadius; ++dc) {
      const Cell cell{self.row + dr, self.col + dc};
      const std::size_t k = static_cast<std::size_t>((dr + kViewRadius) * kViewSide + (dc + kViewRadius));
      if (!map_.in_bounds(cell)) {
        obs.features[3 * kPlane + k] = 1.0;
        continue;
      }
      if (map_.is_wall(cell)) obs.features[k] = 1.0;
      const int d = map_.dot_index(cell);
      if (d >= 0 && ((state.remaining_dots >> d) & 1ULL)) obs.features[kPlane + k] = 1.0;
      for (std::size_t other = 0; other < kNumAgents; ++other) {
        if (other != agent_id && state.agent_positions[other] == cell) obs.features[2 * kPlane + k] = 1.0;
      }
    }
  }
  obs.features[4 * kPlane] = static_cast<double>(self.row) / (map_.height() - 1);
  obs.features[4 * kPlane + 1] = static_cast<double>(self.col) / (map_.width() - 1);
  obs.features[4 * kPlane + 2] = static_cast<double>(state.timestep) / kEpisodeLimit;
  return obs;
}

std::vector<double> PacmenEnv::global_state(const EnvState& state) const {
  std::vector<double> v;
  v.reserve(global_state_size());
  for (const Cell& p : state.agent_positions) {
    v.push_back(static_cast<double>(p.row) / (map_.height() - 1));
    v.push_back(static_cast<double>(p.col) / (map_.width() - 1));
  }
  for (std::size_t k = 0; k < map_.initial_dots().size(); ++k) {
    v.push_back(static_cast<double>((state.remaining_dots >> k) & 1ULL));
  }
  v.push_back(static_cast<double>(state.timestep) / kEpisodeLimit);
  return v;
}

int PacmenEnv::count_in_room(std::uint64_t mask, Room room) const {
  return std::popcount(mask & room_masks_[static_cast<std::size_t>(room)]);
}

std::string render_ascii(const GridMap& map, const EnvState& state) {
  std::string out;
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      const Cell cell{r, c};
      char ch = '.';
      if (map.is_wall(cell)) {
        ch = '#';
      } else if (const int d = map.dot_index(cell); d >= 0 && ((state.remaining_dots >> d) & 1ULL)) {
        ch = 'o';
      }
      for (std::size_t a = 0; a < kNumAgents; ++a) {
        if (state.agent_positions[a] == cell) ch = static_cast<char>('0' + a);
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  out += "t=" + std::to_string(state.timestep) + "\n";
  return out;
}

}  // namespace codicon::env
