#pragma once

#include <optional>

#include "hola/plan.hpp"
#include "hola/world.hpp"

namespace hola {

enum class AttackerKind { None, Stealthy, Bold };

struct AttackerConfig {
  RobotId robot = -1;
  AttackerKind kind = AttackerKind::None;
};

// Certainty-seeking attacker. Searches the window in which every robot's
// announced path is known for a deviation that starts at ann.t, visits a
// forbidden cell, rejoins its own announced path, and along the way is
// never seen off its announced cell and never absent when the announced
// paths schedule an observation of it. The first such deviation in
// (end-time, cell-index) order is returned; nullopt means abstain.
std::optional<Deviation> stealthy_find_attack(const GridWorld& w,
                                              const MapfPlan& plan,
                                              const Announcement& ann,
                                              RobotId attacker);

// Greedy attacker step. Plans over the announced window minimizing, in
// lexicographic order: remaining distance to the nearest forbidden cell,
// then (after the visit) remaining distance to its announced position for
// the rejoin, then the report mismatches its positions would cause against
// announced positions. The raid itself is the point; dodging scheduled
// observers is best-effort among equally fast routes, so short announcements
// leave it blundering into sensor ranges it could not foresee. Robots beyond
// their announced horizons are ignored. Ties pick the smaller cell index.
// Returns the next cell for time t+1.
CellId bold_plan_step(const GridWorld& w, const MapfPlan& plan,
                      const Announcement& ann, RobotId attacker,
                      CellId current, Timestep t, bool visited_forbidden);

}  // namespace hola
