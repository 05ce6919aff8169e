#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hola/cellset.hpp"

namespace hola {

using CellId = int;  // dense index over free cells
using RobotId = int;
using Timestep = int;

enum class GraphKind { Motion, Sensor };

struct RowCol {
  int row = 0;
  int col = 0;
  bool operator==(const RowCol&) const = default;
};

// 4-connected grid with blocked cells. Free cells get dense ids so vertex
// sets fit in small bitsets. Both the motion graph and the sensor graph are
// closed neighborhoods (a cell sees/reaches itself); they coincide on the
// grid worlds handled here, but the accessors stay separate so a different
// sensor model can be slotted in later.
class GridWorld {
 public:
  GridWorld() = default;
  GridWorld(int width, int height, const std::vector<RowCol>& blocked = {});

  // Parses the plain-text map format:
  //   height <H>
  //   width <W>
  //   map
  //   <H rows of '.' (free) and '@' (blocked)>
  // Throws std::runtime_error naming line and column on malformed input.
  static GridWorld parse_map(const std::string& text);
  static GridWorld load_map(const std::string& path);

  std::string to_map_text() const;

  int width() const { return width_; }
  int height() const { return height_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool is_blocked(int row, int col) const {
    return blocked_[row * width_ + col] != 0;
  }
  // Dense id of a free cell, or -1 for blocked/out-of-range.
  CellId cell_at(int row, int col) const {
    if (!in_bounds(row, col)) return -1;
    return grid_to_id_[row * width_ + col];
  }
  RowCol rc(CellId id) const { return cells_[id]; }

  // Closed neighborhood of one cell (itself + free 4-neighbors), sorted.
  const std::vector<CellId>& motion_neighbors(CellId v) const {
    return nbrs_[v];
  }
  const std::vector<CellId>& sensor_neighbors(CellId v) const {
    return nbrs_[v];
  }
  const CellSet& neighbor_mask(CellId v) const { return nbr_mask_[v]; }

  // N(X) = union of closed neighborhoods over X; N({}) = {}.
  CellSet neighborhood(const CellSet& x, GraphKind kind) const;
  void neighborhood_into(const CellSet& x, GraphKind kind, CellSet& out) const;

  CellSet empty_set() const { return CellSet(num_cells()); }

  // Static no-go region used by the attack analysis. Must be free cells.
  void set_forbidden(const std::vector<CellId>& cells);
  const CellSet& forbidden() const { return forbidden_; }
  const std::vector<CellId>& forbidden_cells() const {
    return forbidden_list_;
  }

  bool adjacent(CellId a, CellId b) const;  // closed: adjacent(v, v) is true

 private:
  void build_index();

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> blocked_;               // row-major
  std::vector<int> grid_to_id_;                // row-major, -1 when blocked
  std::vector<RowCol> cells_;                  // dense id -> coordinates
  std::vector<std::vector<CellId>> nbrs_;      // closed neighborhoods
  std::vector<CellSet> nbr_mask_;
  CellSet forbidden_;
  std::vector<CellId> forbidden_list_;
};

}  // namespace hola
