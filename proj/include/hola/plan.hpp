#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hola/world.hpp"

namespace hola {

// Joint plan: one path per robot, all of equal length T+1 (robots rest at
// their goals to pad). paths[i][t] is robot i's cell at timestep t.
struct MapfPlan {
  std::vector<std::vector<CellId>> paths;

  int num_robots() const { return static_cast<int>(paths.size()); }
  // Mission horizon T (number of transitions; positions exist for 0..T).
  int horizon() const {
    return paths.empty() ? 0 : static_cast<int>(paths[0].size()) - 1;
  }
  CellId at(RobotId i, Timestep t) const { return paths[i][t]; }
};

// Per-robot announced horizons issued at time t: robot i's positions
// 0..horizon[i] are public. Invariant: t <= horizon[i] <= T.
struct Announcement {
  Timestep t = 0;
  std::vector<Timestep> horizon;

  Timestep min_horizon() const;
};

// Periodic announcement policy: every p steps, release k steps past the
// epoch start. Requires 1 <= p <= k so coverage never lapses.
struct PkPolicy {
  int p = 1;
  int k = 1;
};

// Horizon in force at time t under (p,k): min(T, floor(t/p)*p + k).
Announcement slice_announcement(const MapfPlan& plan, const PkPolicy& policy,
                                Timestep t);
Announcement full_announcement(const MapfPlan& plan, Timestep t);
Announcement uniform_announcement(const MapfPlan& plan, Timestep t,
                                  Timestep horizon);

// One robot's path replaced strictly inside (window_start, window_end);
// endpoints stay on the plan. interior[j] is the position at time
// window_start + 1 + j.
struct Deviation {
  RobotId robot = 0;
  Timestep window_start = 0;
  Timestep window_end = 0;
  std::vector<CellId> interior;

  CellId at(const MapfPlan& plan, Timestep t) const {
    if (t > window_start && t < window_end)
      return interior[t - window_start - 1];
    return plan.at(robot, t);
  }
};

struct CoObservation {
  RobotId observer = 0;
  RobotId observed = 0;
  CellId location = 0;  // where the observed robot was seen
  Timestep time = 0;
  bool operator==(const CoObservation&) const = default;
};

// What a robot tells the planner about timestep t: whether it executed its
// scheduled move, and which robots it saw where. Observations are kept
// sorted by observed id so report sets compare structurally.
struct SelfReport {
  RobotId robot = 0;
  Timestep time = 0;
  bool move_ok = true;
  std::vector<CoObservation> observations;
  bool operator==(const SelfReport&) const = default;
};

enum class PlanViolation { Structure, Walk, Vertex, Edge };

struct PlanError {
  PlanViolation kind = PlanViolation::Structure;
  Timestep t = 0;
  RobotId i = 0;
  RobotId j = -1;  // second robot for vertex/edge conflicts
  std::string detail;
};

// First violation in scan order (t ascending, then robot ids), or nullopt
// for a valid plan: equal lengths, every step a motion edge or wait, no two
// robots on one cell, no swap across an edge.
std::optional<PlanError> validate_plan(const GridWorld& w,
                                       const MapfPlan& plan);

// Reports every robot would file at every timestep if the plan were executed
// faithfully: all moves ok, observations exactly the scheduled
// co-observations. Indexed [t][robot].
std::vector<std::vector<SelfReport>> expected_reports(const GridWorld& w,
                                                      const MapfPlan& plan);

// Reports actually produced at timestep t when robots sit at `actual`
// positions but claim the plan's moves; an attacker index (or -1) marks the
// robot whose report is forged to match expectations exactly.
std::vector<SelfReport> reports_at(const GridWorld& w, const MapfPlan& plan,
                                   const std::vector<CellId>& actual,
                                   Timestep t, RobotId forged_by,
                                   const std::vector<SelfReport>& expected);

enum class AnomalyReason { MoveFail, MissedObservation, UnexpectedObservation };

struct Anomaly {
  RobotId robot = 0;  // robot whose report mismatched
  AnomalyReason reason = AnomalyReason::MoveFail;
};

// Compares received reports for one timestep against the expected set.
// Empty result = nothing suspicious. When ignore_observations is set only
// move failures count (a planner running without the co-observation
// schedule, used by the ablation experiments).
std::vector<Anomaly> detect(const std::vector<SelfReport>& expected,
                            const std::vector<SelfReport>& received,
                            bool ignore_observations = false);

// Structural check: walk edges, endpoints matching the plan, window inside
// [0, T], interior length consistent, and no conflict with the other
// robots' planned paths.
std::optional<PlanError> validate_deviation(const GridWorld& w,
                                            const MapfPlan& plan,
                                            const Deviation& d);

// True when the deviation puts the robot on a forbidden cell strictly
// inside its window.
bool is_forbidden_deviation(const GridWorld& w, const MapfPlan& plan,
                            const Deviation& d);

MapfPlan apply_deviation(const MapfPlan& plan, const Deviation& d);

}  // namespace hola
