#pragma once

#include <set>
#include <tuple>
#include <vector>

#include "hola/plan.hpp"
#include "hola/world.hpp"

namespace hola {

struct MapfInstance {
  const GridWorld* world = nullptr;
  std::vector<CellId> starts;
  std::vector<CellId> goals;

  int num_robots() const { return static_cast<int>(starts.size()); }
};

// Space-time constraints produced by the high-level search. A vertex entry
// (t, v) bans being at v at time t; an edge entry (t, from, to) bans taking
// that directed move between t and t+1.
struct Constraints {
  std::set<std::pair<Timestep, CellId>> vertex;
  std::set<std::tuple<Timestep, CellId, CellId>> edge;

  bool blocks_vertex(Timestep t, CellId v) const {
    return vertex.count({t, v}) > 0;
  }
  bool blocks_edge(Timestep t, CellId from, CellId to) const {
    return edge.count({t, from, to}) > 0;
  }
  Timestep latest() const;
};

struct LowLevelResult {
  bool found = false;
  std::vector<CellId> path;  // positions start..final arrival (unpadded)
  int cost = 0;              // final arrival time
  int fmin = 0;              // admissible bound: optimal cost >= fmin
  long long expanded = 0;
};

// Bounded-suboptimal space-time A* for one robot: returns a path of cost at
// most w_subopt * fmin, preferring, among near-optimal frontier states, the
// ones that collide least with other_paths (each padded with goal rest).
LowLevelResult low_level_focal_search(
    const GridWorld& w, CellId start, CellId goal, const Constraints& cons,
    double w_subopt,
    const std::vector<const std::vector<CellId>*>& other_paths);

enum class SolveStatus { Ok, Unsolvable, BudgetExceeded };

struct SolveStats {
  int cost = 0;         // sum of final arrival times
  int lower_bound = 0;  // certified: optimal sum-of-costs >= lower_bound
  int high_level_expanded = 0;
  long long low_level_expanded = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unsolvable;
  MapfPlan plan;  // padded to uniform length on success
  SolveStats stats;
};

// Conflict-based search with focal lists at both levels. The returned plan
// is conflict-free (robots rest on their goals, and those cells stay
// reserved) with sum-of-costs <= w_subopt * stats.lower_bound. Exhausting
// the tree reports Unsolvable; node_budget caps high-level expansions and
// reports BudgetExceeded, which callers must treat as "don't know".
SolveResult plan_ecbs(const MapfInstance& inst, double w_subopt = 1.3,
                      int node_budget = 200000);

}  // namespace hola
