#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "codicon/env/grid_map.hpp"
#include "codicon/env/pacmen.hpp"

namespace codicon::env {

// Per-cell occupancy counts, overall and per agent.
class VisitationCounter {
 public:
  VisitationCounter(int height, int width);
  explicit VisitationCounter(const GridMap& map) : VisitationCounter(map.height(), map.width()) {}

  int height() const { return height_; }
  int width() const { return width_; }

  std::uint64_t count(Cell c) const { return total_[index(c)]; }
  std::uint64_t agent_count(std::size_t agent, Cell c) const { return per_agent_[agent][index(c)]; }
  std::uint64_t total() const;

  // Visits inside `room`, all agents or one agent.
  std::uint64_t room_mass(const GridMap& map, Room room) const;
  std::uint64_t agent_room_mass(const GridMap& map, std::size_t agent, Room room) const;
  std::uint64_t agent_total(std::size_t agent) const;

  // height lines of width comma-separated counts.
  std::string to_csv() const;

  void add(const EnvState& state);

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

  int height_;
  int width_;
  std::vector<std::uint64_t> total_;
  std::array<std::vector<std::uint64_t>, kNumAgents> per_agent_;
};

inline VisitationCounter& accumulate_visitation(VisitationCounter& counter, const EnvState& state) {
  counter.add(state);
  return counter;
}

}  // namespace codicon::env
