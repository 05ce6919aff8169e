#include "hola/world.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hola {

namespace {

[[noreturn]] void parse_fail(int line, int col, const std::string& what) {
  std::ostringstream os;
  os << "map parse error at line " << line << ", column " << col << ": "
     << what;
  throw std::runtime_error(os.str());
}

// Reads "<key> <positive int>" from a header line.
int parse_header_int(const std::string& line, const std::string& key,
                     int line_no) {
  std::istringstream is(line);
  std::string word;
  if (!(is >> word) || word != key)
    parse_fail(line_no, 1, "expected '" + key + " <n>'");
  long long v = 0;
  if (!(is >> v) || v <= 0)
    parse_fail(line_no, static_cast<int>(key.size()) + 2,
               "expected a positive integer after '" + key + "'");
  std::string rest;
  if (is >> rest)
    parse_fail(line_no, static_cast<int>(line.size()),
               "unexpected trailing content");
  return static_cast<int>(v);
}

}  // namespace

GridWorld::GridWorld(int width, int height,
                     const std::vector<RowCol>& blocked)
    : width_(width), height_(height) {
  blocked_.assign(static_cast<size_t>(width) * height, 0);
  for (const auto& rc : blocked) {
    if (!in_bounds(rc.row, rc.col))
      throw std::runtime_error("blocked cell out of bounds");
    blocked_[rc.row * width_ + rc.col] = 1;
  }
  build_index();
}

GridWorld GridWorld::parse_map(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) lines.push_back(cur);  // trailing newline optional
  }
  if (lines.size() < 3) parse_fail(static_cast<int>(lines.size()) + 1, 1,
                                   "incomplete header");
  int height = parse_header_int(lines[0], "height", 1);
  int width = parse_header_int(lines[1], "width", 2);
  if (lines[2] != "map") parse_fail(3, 1, "expected 'map'");
  if (static_cast<int>(lines.size()) < 3 + height)
    parse_fail(static_cast<int>(lines.size()) + 1, 1,
               "expected " + std::to_string(height) + " map rows");
  for (size_t i = 3 + height; i < lines.size(); ++i) {
    if (!lines[i].empty())
      parse_fail(static_cast<int>(i) + 1, 1, "unexpected content after map");
  }

  GridWorld w;
  w.width_ = width;
  w.height_ = height;
  w.blocked_.assign(static_cast<size_t>(width) * height, 0);
  for (int r = 0; r < height; ++r) {
    const std::string& row = lines[3 + r];
    int line_no = 4 + r;
    if (static_cast<int>(row.size()) != width)
      parse_fail(line_no, static_cast<int>(row.size()) + 1,
                 "row has " + std::to_string(row.size()) +
                     " cells, expected " + std::to_string(width));
    for (int c = 0; c < width; ++c) {
      if (row[c] == '.') continue;
      if (row[c] == '@') {
        w.blocked_[r * width + c] = 1;
        continue;
      }
      parse_fail(line_no, c + 1,
                 std::string("unknown glyph '") + row[c] + "'");
    }
  }
  w.build_index();
  return w;
}

GridWorld GridWorld::load_map(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open map file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_map(os.str());
}

std::string GridWorld::to_map_text() const {
  std::ostringstream os;
  os << "height " << height_ << "\n"
     << "width " << width_ << "\n"
     << "map\n";
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c)
      os << (is_blocked(r, c) ? '@' : '.');
    os << "\n";
  }
  return os.str();
}

void GridWorld::build_index() {
  grid_to_id_.assign(blocked_.size(), -1);
  cells_.clear();
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (!blocked_[r * width_ + c]) {
        grid_to_id_[r * width_ + c] = static_cast<int>(cells_.size());
        cells_.push_back({r, c});
      }
    }
  }
  int n = num_cells();
  nbrs_.assign(n, {});
  nbr_mask_.assign(n, CellSet(n));
  static constexpr int dr[] = {0, -1, 0, 1, 0};
  static constexpr int dc[] = {0, 0, -1, 0, 1};
  for (int id = 0; id < n; ++id) {
    auto [r, c] = cells_[id];
    for (int k = 0; k < 5; ++k) {
      CellId m = cell_at(r + dr[k], c + dc[k]);
      if (m >= 0) nbrs_[id].push_back(m);
    }
    std::sort(nbrs_[id].begin(), nbrs_[id].end());
    for (CellId m : nbrs_[id]) nbr_mask_[id].set(m);
  }
  forbidden_ = CellSet(n);
  forbidden_list_.clear();
}

CellSet GridWorld::neighborhood(const CellSet& x, GraphKind kind) const {
  CellSet out = empty_set();
  neighborhood_into(x, kind, out);
  return out;
}

void GridWorld::neighborhood_into(const CellSet& x, GraphKind,
                                  CellSet& out) const {
  // Motion and sensor graphs coincide; the kind parameter keeps the call
  // sites honest about which relation they mean.
  out.clear();
  x.for_each([&](int v) { out |= nbr_mask_[v]; });
}

void GridWorld::set_forbidden(const std::vector<CellId>& cells) {
  CellSet f(num_cells());
  for (CellId v : cells) {
    if (v < 0 || v >= num_cells())
      throw std::runtime_error("forbidden cell id out of range");
    f.set(v);
  }
  forbidden_ = f;
  forbidden_list_ = f.to_vector();
}

bool GridWorld::adjacent(CellId a, CellId b) const {
  return nbr_mask_[a].test(b);
}

}  // namespace hola
