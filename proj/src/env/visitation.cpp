#include "codicon/env/visitation.hpp"

#include <numeric>

namespace codicon::env {

VisitationCounter::VisitationCounter(int height, int width)
    : height_(height), width_(width), total_(static_cast<std::size_t>(height) * width, 0) {
  for (auto& grid : per_agent_) grid.assign(total_.size(), 0);
}

void VisitationCounter::add(const EnvState& state) {
  for (std::size_t a = 0; a < kNumAgents; ++a) {
    const std::size_t idx = index(state.agent_positions[a]);
    ++total_[idx];
    ++per_agent_[a][idx];
  }
}

std::uint64_t VisitationCounter::total() const {
  return std::accumulate(total_.begin(), total_.end(), std::uint64_t{0});
}

std::uint64_t VisitationCounter::agent_total(std::size_t agent) const {
  return std::accumulate(per_agent_[agent].begin(), per_agent_[agent].end(), std::uint64_t{0});
}

std::uint64_t VisitationCounter::room_mass(const GridMap& map, Room room) const {
  std::uint64_t sum = 0;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (map.room_at({r, c}) == room) sum += total_[index({r, c})];
    }
  }
  return sum;
}

std::uint64_t VisitationCounter::agent_room_mass(const GridMap& map, std::size_t agent, Room room) const {
  std::uint64_t sum = 0;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (map.room_at({r, c}) == room) sum += per_agent_[agent][index({r, c})];
    }
  }
  return sum;
}

std::string VisitationCounter::to_csv() const {
  std::string out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (c) out.push_back(',');
      out += std::to_string(total_[index({r, c})]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace codicon::env
