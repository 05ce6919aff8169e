#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hola/adversary.hpp"
#include "hola/plan.hpp"
#include "hola/world.hpp"

namespace hola {

enum class PolicyKind { Full, Pk, Synth };

// How the planner releases plan prefixes during execution. Full reveals the
// whole plan at t = 0. Pk re-announces every p steps, k steps deep. Synth
// searches for the longest prefix that still verifies secure and announces a
// fresh one whenever the previous horizon runs out.
struct AnnouncementPolicy {
  PolicyKind kind = PolicyKind::Full;
  int p = 1;       // Pk: announcement period
  int k = 1;       // Pk: released depth per announcement
  int k_max = 10;  // Synth: ceiling for the synthesized depth
};

// A self-contained experiment: world (with its forbidden cell applied),
// instance endpoints, the solved plan, the announcement policy, and the
// attacker. Candidate lists record the pool the attacker robot and the
// forbidden cell were drawn from.
struct Scenario {
  std::string id;
  GridWorld world;
  std::vector<CellId> starts;
  std::vector<CellId> goals;
  MapfPlan plan;
  AnnouncementPolicy policy;
  AttackerConfig attacker;
  CellId forbidden = -1;
  std::uint64_t seed = 0;
  std::vector<RobotId> attacker_candidates;
  std::vector<CellId> forbidden_candidates;
};

struct MetricsRecord {
  std::string scenario_id;
  int robots = 0;
  int policy_p = 0;  // 0 unless the periodic policy
  int policy_k = 0;  // Pk depth, or the Synth ceiling
  AttackerKind attacker_kind = AttackerKind::None;
  bool attack_success = false;
  bool detection_missed = false;  // meaningful only when attack_success
  std::optional<Timestep> first_detection_t;
  Timestep max_inter_obs = 0;
  std::optional<bool> secure_verdict;
  double verify_ms = 0.0;
  double sim_ms = 0.0;
};

struct SimOptions {
  bool ignore_observations = false;  // detection by move failures only
  int workers = 1;                   // parallelism inside verification calls
};

// Closed-loop run: the planner announces per policy, honest robots execute
// the plan and report truthfully, the attacker acts per its kind and forges
// nominal reports, and the planner runs anomaly detection every step.
// Honest robots never collide with each other; one blocked by the attacker
// stays put (its move failure is itself a detectable anomaly) and freezes for
// the rest of the run. Deterministic for a fixed scenario.
MetricsRecord run_simulation(const Scenario& s, const SimOptions& opt = {});

// Longest stretch of timesteps in which no honest robot is scheduled to
// co-observe the given robot, including the run-in from t=0 and the tail to
// T (max gap between consecutive anchors {0} U obs-times U {T}).
Timestep max_inter_observation(const GridWorld& w, const MapfPlan& plan,
                               RobotId robot);

struct GenerateParams {
  int size = 32;
  int robots = 10;
  int obstacles = 200;
  int count = 1;
  std::uint64_t seed = 0;
  AnnouncementPolicy policy;
  AttackerKind attacker_kind = AttackerKind::Bold;
  int max_attempts = 50;  // map/endpoint redraws per scenario before failing
};

// Deterministic under seed: random maps with exactly `obstacles` blocked
// cells, distinct endpoints inside the largest free component, ECBS-solved
// plans, and 10 attacker / 10 forbidden candidates per scenario (forbidden
// candidates never lie on a planned path). Throws std::runtime_error when
// the retry budget is exhausted.
std::vector<Scenario> generate_scenarios(const GenerateParams& params);

enum class GroupBy { None, Robots, Policy, InterObsBin };

struct AggregateRow {
  std::string group;
  int count = 0;
  int with_verdict = 0;       // records carrying a secure_verdict
  double secure_rate = 0.0;   // verified / with_verdict
  double attack_success_rate = 0.0;
  int positives = 0;          // attack_success count
  double detection_miss_rate = 0.0;  // missed / positives
};

// Aggregates rates per group; InterObsBin groups max_inter_obs into width-5
// bins labelled "lo-hi".
std::vector<AggregateRow> compute_metrics(
    const std::vector<MetricsRecord>& records, GroupBy group_by);

}  // namespace hola
