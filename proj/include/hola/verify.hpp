#pragma once

#include <vector>

#include "hola/cellset.hpp"
#include "hola/plan.hpp"
#include "hola/world.hpp"

namespace hola {

enum class Verdict { Secure, NotVerified };

// Result of checking one (deviation start, attacker) pair.
struct VerifyOutcome {
  Verdict verdict = Verdict::NotVerified;
  // First timestep after s at which some continuation of the announcement
  // could co-observe the attacker; -1 when the mission ends first.
  Timestep u_star = -1;
  std::vector<CellId> rendezvous;  // candidate co-observation cells at u_star
  int restarts = 0;                // dead-end-driven re-derivations

  bool secure() const { return verdict == Verdict::Secure; }
};

// Reachability artifact of the sweep phase. It depends on the plan and the
// announcement but not on the forbidden region, so one profile can be
// reused to answer the attack-existence question for several candidate
// forbidden sets.
struct ReachProfile {
  Timestep s = 0;
  RobotId attacker = 0;
  Timestep u_star = -1;  // -1: no possible co-observation before the end
  CellSet q;             // candidate co-observation cells at u_star
  // zones[d]: cells some continuation could observe at time s+d (d >= 1);
  // zones[0] is unused padding.
  std::vector<CellSet> zones;
  int restarts = 0;
};

// Sweep phase: evolve per-robot reachable sets from the announced positions
// at s = ann.t until the attacker's set meets a possible observation zone
// or the plan ends.
ReachProfile reach_profile(const GridWorld& w, const MapfPlan& plan,
                           const Announcement& ann, RobotId attacker);

// Attack-existence phase against w.forbidden(), evaluated on a profile.
VerifyOutcome attack_check(const GridWorld& w, const MapfPlan& plan,
                           const Announcement& ann, RobotId attacker,
                           const ReachProfile& profile);

// Both phases: is a deviation by `attacker` starting at ann.t provably
// unable to visit a forbidden cell while staying certainly unobserved?
VerifyOutcome verify_announcement(const GridWorld& w, const MapfPlan& plan,
                                  const Announcement& ann, RobotId attacker);

struct ScheduleCell {
  Timestep s = 0;
  RobotId attacker = 0;
  VerifyOutcome outcome;
};

struct ScheduleVerdict {
  bool secure = true;
  std::vector<ScheduleCell> cells;  // ordered by (s, attacker)
  double wall_ms = 0.0;
};

// Checks every deviation start s in [0, T-2] and every robot as the
// attacker, each under the announcement in force at s. `schedule` holds the
// distinct announcements in ascending order of issue time, starting at 0.
// Tasks fan out over `workers` threads; verdicts are identical for any
// worker count.
ScheduleVerdict verify_schedule(const GridWorld& w, const MapfPlan& plan,
                                const std::vector<Announcement>& schedule,
                                int workers = 1);
ScheduleVerdict verify_schedule(const GridWorld& w, const MapfPlan& plan,
                                const PkPolicy& policy, int workers = 1);

// Same check restricted to one prospective attacker: its verdict across
// every deviation start. This is the per-scenario security metric when a
// simulation designates a single compromised robot.
ScheduleVerdict verify_attacker_schedule(
    const GridWorld& w, const MapfPlan& plan,
    const std::vector<Announcement>& schedule, RobotId attacker,
    int workers = 1);
ScheduleVerdict verify_attacker_schedule(const GridWorld& w,
                                         const MapfPlan& plan,
                                         const PkPolicy& policy,
                                         RobotId attacker, int workers = 1);

struct SynthesizedAnnouncement {
  Announcement announcement;
  Timestep k = 1;
  bool verified = false;
};

// Longest uniform horizon extension k <= k_max whose announcement at time t
// checks secure for every attacker, found by descending from k_max. k = 1
// is the floor; if even that fails, the k = 1 announcement is returned with
// verified = false.
SynthesizedAnnouncement synthesize_max_announcement(const GridWorld& w,
                                                    const MapfPlan& plan,
                                                    Timestep t, Timestep k_max,
                                                    int workers = 1);

}  // namespace hola
