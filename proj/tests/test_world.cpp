#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "test_support.hpp"

using namespace hola;
using namespace test_support;

TEST_CASE("map text parses and round-trips unchanged") {
  const std::string text =
      "height 3\n"
      "width 4\n"
      "map\n"
      "..@.\n"
      "....\n"
      "@..@\n";
  GridWorld w = GridWorld::parse_map(text);
  CHECK(w.width() == 4);
  CHECK(w.height() == 3);
  CHECK(w.num_cells() == 9);
  CHECK(w.to_map_text() == text);

  CHECK(w.is_blocked(0, 2));
  CHECK(w.is_blocked(2, 0));
  CHECK(w.is_blocked(2, 3));
  CHECK_FALSE(w.is_blocked(1, 1));
  CHECK(w.cell_at(0, 2) == -1);
  CHECK(w.cell_at(-1, 0) == -1);
  CHECK(w.cell_at(0, 4) == -1);
}

TEST_CASE("dense cell ids are row-major over free cells and rc() inverts") {
  GridWorld w = make_world({"..", ".."});
  for (CellId v = 0; v < w.num_cells(); ++v) {
    RowCol p = w.rc(v);
    CHECK(w.cell_at(p.row, p.col) == v);
  }
  // Row-major: (0,0) < (0,1) < (1,0) < (1,1).
  CHECK(cell(w, 0, 0) < cell(w, 0, 1));
  CHECK(cell(w, 0, 1) < cell(w, 1, 0));
  CHECK(cell(w, 1, 0) < cell(w, 1, 1));
}

TEST_CASE("malformed maps are rejected with location info") {
  CHECK_THROWS_AS(GridWorld::parse_map("width 3\nheight 2\nmap\n...\n...\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(GridWorld::parse_map("height 2\nwidth 3\nmap\n...\n..\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(GridWorld::parse_map("height 1\nwidth 3\nmap\n.x.\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(GridWorld::parse_map("height 2\nwidth 3\nmap\n...\n"),
                  std::runtime_error);
  try {
    GridWorld::parse_map("height 1\nwidth 3\nmap\n.x.\n");
    CHECK(false);
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("4") != std::string::npos);  // line of the bad glyph
    CHECK(msg.find("2") != std::string::npos);  // its column
  }
}

TEST_CASE("closed neighborhoods on a 1x3 strip") {
  GridWorld w = make_world({"..."});
  const CellId a = cell(w, 0, 0), b = cell(w, 0, 1), c = cell(w, 0, 2);
  CHECK(w.motion_neighbors(a) == std::vector<CellId>{a, b});
  CHECK(w.motion_neighbors(b) == std::vector<CellId>{a, b, c});
  CHECK(w.motion_neighbors(c) == std::vector<CellId>{b, c});
  CHECK(w.sensor_neighbors(b) == w.motion_neighbors(b));
  for (CellId v : {a, b, c}) {
    CHECK(w.neighbor_mask(v).test(v));
    CHECK(w.neighbor_mask(v).count() ==
          static_cast<int>(w.motion_neighbors(v).size()));
  }
}

TEST_CASE("blocked cells are excluded from neighborhoods") {
  GridWorld w = make_world({".@.", "...", ".@."});
  const CellId mid = cell(w, 1, 1);
  // (0,1) and (2,1) are blocked, so the middle sees itself and the sides.
  auto nbrs = w.motion_neighbors(mid);
  CHECK(nbrs == std::vector<CellId>{cell(w, 1, 0), mid, cell(w, 1, 2)});
}

TEST_CASE("neighborhood of a set is the union of closed neighborhoods") {
  GridWorld w = make_world({"....."});
  CellSet x = w.empty_set();
  CHECK(w.neighborhood(x, GraphKind::Motion).none());
  x.set(cell(w, 0, 0));
  x.set(cell(w, 0, 3));
  CellSet n = w.neighborhood(x, GraphKind::Sensor);
  CHECK(n.to_vector() == std::vector<int>{cell(w, 0, 0), cell(w, 0, 1),
                                          cell(w, 0, 2), cell(w, 0, 3),
                                          cell(w, 0, 4)});
  CellSet into = w.empty_set();
  w.neighborhood_into(x, GraphKind::Motion, into);
  CHECK(into == n);
}

TEST_CASE("adjacency is closed and respects walls") {
  GridWorld w = make_world({"..", ".."});
  const CellId a = cell(w, 0, 0);
  CHECK(w.adjacent(a, a));
  CHECK(w.adjacent(a, cell(w, 0, 1)));
  CHECK(w.adjacent(a, cell(w, 1, 0)));
  CHECK_FALSE(w.adjacent(a, cell(w, 1, 1)));  // diagonal
}

TEST_CASE("forbidden region stores exactly the given free cells") {
  GridWorld w = open_grid(3, 3);
  CHECK(w.forbidden().none());
  w.set_forbidden({cell(w, 1, 1), cell(w, 2, 0)});
  CHECK(w.forbidden().count() == 2);
  CHECK(w.forbidden().test(cell(w, 1, 1)));
  CHECK(w.forbidden().test(cell(w, 2, 0)));
  CHECK(w.forbidden_cells() ==
        std::vector<CellId>{cell(w, 1, 1), cell(w, 2, 0)});
}

TEST_CASE("constructor with blocked list matches parsing the same map") {
  GridWorld a(3, 2, {{0, 1}, {1, 2}});
  GridWorld b = make_world({".@.", "..@"});
  CHECK(a.to_map_text() == b.to_map_text());
  CHECK(a.num_cells() == 4);
}

TEST_CASE("open grid helper builds a fully free map") {
  GridWorld w = open_grid(5, 2);
  CHECK(w.width() == 5);
  CHECK(w.height() == 2);
  CHECK(w.num_cells() == 10);
}
