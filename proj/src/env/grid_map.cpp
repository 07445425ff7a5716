#include "codicon/env/grid_map.hpp"

#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>

namespace codicon::env {
namespace {

constexpr std::string_view kDefaultMap =
    "#########...#########\n"
    "#########.o.#########\n"
    "#########.o.#########\n"
    "#########.o.#########\n"
    "#########...#########\n"
    "#########...#########\n"
    "#########...#########\n"
    "#########...#########\n"
    "##########0##########\n"
    "........#...#........\n"
    ".ooo....3...1....ooo.\n"
    "........#...#........\n"
    "##########2##########\n"
    "#########ooo#########\n"
    "#########ooo#########\n"
    "#########ooo#########\n"
    "#########ooo#########\n"
    "#########ooo#########\n"
    "#########ooo#########\n"
    "#########ooo#########\n"
    "#########ooo#########\n";

Room classify(int row, int col, int height, int width) {
  const int dr = row - height / 2;
  const int dc = col - width / 2;
  const int ring = std::max(std::abs(dr), std::abs(dc));
  if (ring <= 1) return Room::kCenter;
  if (ring == 2 && (dr == 0 || dc == 0)) return Room::kCorridor;
  if (std::abs(dr) > std::abs(dc)) return dr < 0 ? Room::kNorth : Room::kSouth;
  return dc > 0 ? Room::kEast : Room::kWest;
}

}  // namespace

std::string_view room_name(Room room) {
  switch (room) {
    case Room::kWall: return "wall";
    case Room::kCenter: return "center";
    case Room::kNorth: return "north";
    case Room::kEast: return "east";
    case Room::kSouth: return "south";
    case Room::kWest: return "west";
    case Room::kCorridor: return "corridor";
  }
  return "unknown";
}

GridMap GridMap::parse(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw MapError("map is empty");

  GridMap map;
  map.height_ = static_cast<int>(lines.size());
  map.width_ = static_cast<int>(lines.front().size());
  const std::size_t cells = static_cast<std::size_t>(map.width_) * map.height_;
  map.walls_.assign(cells, 0);
  map.rooms_.assign(cells, Room::kWall);
  map.dot_lookup_.assign(cells, -1);
  std::array<bool, kNumAgents> seen{};

  for (int r = 0; r < map.height_; ++r) {
    if (static_cast<int>(lines[r].size()) != map.width_) {
      throw MapError("map row " + std::to_string(r) + " has length " + std::to_string(lines[r].size()) +
                     ", expected " + std::to_string(map.width_));
    }
    for (int c = 0; c < map.width_; ++c) {
      const char ch = lines[r][c];
      const Cell cell{r, c};
      const std::size_t idx = map.index(cell);
      switch (ch) {
        case '#':
          map.walls_[idx] = 1;
          continue;
        case '.':
          break;
        case 'o':
          map.dot_lookup_[idx] = static_cast<int>(map.dots_.size());
          map.dots_.push_back(cell);
          break;
        case '0': case '1': case '2': case '3': {
          const int agent = ch - '0';
          if (seen[agent]) throw MapError(std::string("duplicate spawn '") + ch + "'");
          seen[agent] = true;
          map.spawns_[agent] = cell;
          break;
        }
        default:
          throw MapError(std::string("unknown map character '") + ch + "' at row " + std::to_string(r));
      }
      map.rooms_[idx] = classify(r, c, map.height_, map.width_);
    }
  }
  for (std::size_t a = 0; a < kNumAgents; ++a) {
    if (!seen[a]) throw MapError("missing spawn for agent " + std::to_string(a));
  }
  if (map.dots_.empty()) throw MapError("map has no dots");
  if (map.dots_.size() > 64) throw MapError("at most 64 dots are supported");
  return map;
}

GridMap GridMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open map file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

GridMap GridMap::default_map() { return parse(kDefaultMap); }

std::string GridMap::to_text() const {
  std::string out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      const Cell cell{r, c};
      char ch = is_wall(cell) ? '#' : (dot_index(cell) >= 0 ? 'o' : '.');
      for (std::size_t a = 0; a < kNumAgents; ++a) {
        if (spawns_[a] == cell) ch = static_cast<char>('0' + a);
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

std::size_t GridMap::dot_count_in(Room room) const {
  std::size_t n = 0;
  for (const Cell& d : dots_) n += room_at(d) == room ? 1 : 0;
  return n;
}

std::vector<int> bfs_distances(const GridMap& map, Cell from) {
  std::vector<int> dist(static_cast<std::size_t>(map.width()) * map.height(), -1);
  if (!map.in_bounds(from) || map.is_wall(from)) return dist;
  std::deque<Cell> queue{from};
  dist[map.index(from)] = 0;
  constexpr std::array<Cell, 4> kMoves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    for (const Cell& m : kMoves) {
      const Cell next{cur.row + m.row, cur.col + m.col};
      if (!map.in_bounds(next) || map.is_wall(next) || dist[map.index(next)] >= 0) continue;
      dist[map.index(next)] = dist[map.index(cur)] + 1;
      queue.push_back(next);
    }
  }
  return dist;
}

}  // namespace codicon::env
