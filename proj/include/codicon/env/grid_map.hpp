#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace codicon::env {

inline constexpr std::size_t kNumAgents = 4;

struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

enum class Room : std::uint8_t { kWall, kCenter, kNorth, kEast, kSouth, kWest, kCorridor };

inline constexpr std::array<Room, 4> kPeripheralRooms = {Room::kNorth, Room::kEast, Room::kSouth,
                                                         Room::kWest};

std::string_view room_name(Room room);

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Static Pac-Men layout.
//
// Text format, one line per row: '#' wall, '.' floor, 'o' dot, '0'-'3' agent
// spawn (floor). Rows must have equal length. Room labels are derived from
// the geometry: the 3x3 block around the map centre is the centre room, the
// ring one cell outside it holds the corridors, and every other floor cell
// belongs to the peripheral room in its dominant direction.
class GridMap {
 public:
  static GridMap parse(std::string_view text);
  static GridMap load(const std::string& path);
  static GridMap default_map();

  std::string to_text() const;

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_; }
  bool is_wall(Cell c) const { return walls_[index(c)] != 0; }
  Room room_at(Cell c) const { return rooms_[index(c)]; }

  const std::vector<Cell>& initial_dots() const { return dots_; }
  const std::array<Cell, kNumAgents>& spawn_positions() const { return spawns_; }

  // Position of c in initial_dots(), or -1.
  int dot_index(Cell c) const { return dot_lookup_[index(c)]; }
  std::size_t dot_count_in(Room room) const;

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> walls_;
  std::vector<Room> rooms_;
  std::vector<int> dot_lookup_;
  std::vector<Cell> dots_;
  std::array<Cell, kNumAgents> spawns_{};
};

// Shortest-path distances (4-neighbour moves) from `from` to every cell;
// -1 for walls and unreachable cells.
std::vector<int> bfs_distances(const GridMap& map, Cell from);

}  // namespace codicon::env
