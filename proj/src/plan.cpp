#include "hola/plan.hpp"

#include <algorithm>
#include <stdexcept>

namespace hola {

Timestep Announcement::min_horizon() const {
  Timestep m = horizon.empty() ? 0 : horizon[0];
  for (Timestep h : horizon) m = std::min(m, h);
  return m;
}

Announcement slice_announcement(const MapfPlan& plan, const PkPolicy& policy,
                                Timestep t) {
  if (policy.p < 1 || policy.k < policy.p)
    throw std::invalid_argument("announcement policy requires 1 <= p <= k");
  int T = plan.horizon();
  if (t < 0 || t > T)
    throw std::invalid_argument("announcement time outside plan");
  Timestep h = std::min<Timestep>(T, (t / policy.p) * policy.p + policy.k);
  return uniform_announcement(plan, t, h);
}

Announcement full_announcement(const MapfPlan& plan, Timestep t) {
  return uniform_announcement(plan, t, plan.horizon());
}

Announcement uniform_announcement(const MapfPlan& plan, Timestep t,
                                  Timestep horizon) {
  Announcement a;
  a.t = t;
  a.horizon.assign(plan.num_robots(), horizon);
  return a;
}

std::optional<PlanError> validate_plan(const GridWorld& w,
                                       const MapfPlan& plan) {
  const int R = plan.num_robots();
  if (R == 0)
    return PlanError{PlanViolation::Structure, 0, 0, -1, "no robots"};
  const size_t len = plan.paths[0].size();
  if (len == 0)
    return PlanError{PlanViolation::Structure, 0, 0, -1, "empty path"};
  for (RobotId i = 0; i < R; ++i) {
    if (plan.paths[i].size() != len)
      return PlanError{PlanViolation::Structure, 0, i, -1,
                       "paths differ in length"};
    for (CellId v : plan.paths[i])
      if (v < 0 || v >= w.num_cells())
        return PlanError{PlanViolation::Structure, 0, i, -1,
                         "cell id out of range"};
  }
  const int T = plan.horizon();
  // Scan in time order so the reported violation is the earliest one.
  for (Timestep t = 0; t <= T; ++t) {
    for (RobotId i = 0; i < R; ++i) {
      if (t < T && !w.adjacent(plan.at(i, t), plan.at(i, t + 1)))
        return PlanError{PlanViolation::Walk, t, i, -1,
                         "step is not a motion edge"};
      for (RobotId j = i + 1; j < R; ++j) {
        if (plan.at(i, t) == plan.at(j, t))
          return PlanError{PlanViolation::Vertex, t, i, j,
                           "two robots on one cell"};
        if (t < T && plan.at(i, t + 1) == plan.at(j, t) &&
            plan.at(j, t + 1) == plan.at(i, t))
          return PlanError{PlanViolation::Edge, t, i, j,
                           "robots swap across an edge"};
      }
    }
  }
  return std::nullopt;
}

namespace {

void sort_observations(std::vector<CoObservation>& obs) {
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) {
    return a.observed < b.observed;
  });
}

}  // namespace

std::vector<std::vector<SelfReport>> expected_reports(const GridWorld& w,
                                                      const MapfPlan& plan) {
  const int R = plan.num_robots();
  const int T = plan.horizon();
  std::vector<std::vector<SelfReport>> out(T + 1);
  for (Timestep t = 0; t <= T; ++t) {
    out[t].resize(R);
    for (RobotId i = 0; i < R; ++i) {
      SelfReport& rep = out[t][i];
      rep.robot = i;
      rep.time = t;
      rep.move_ok = true;
      for (RobotId j = 0; j < R; ++j) {
        if (j == i) continue;
        if (w.adjacent(plan.at(i, t), plan.at(j, t)))
          rep.observations.push_back({i, j, plan.at(j, t), t});
      }
      sort_observations(rep.observations);
    }
  }
  return out;
}

std::vector<SelfReport> reports_at(const GridWorld& w, const MapfPlan& plan,
                                   const std::vector<CellId>& actual,
                                   Timestep t, RobotId forged_by,
                                   const std::vector<SelfReport>& expected) {
  const int R = plan.num_robots();
  std::vector<SelfReport> out(R);
  for (RobotId i = 0; i < R; ++i) {
    if (i == forged_by) {
      // The compromised robot lies as well as a lie can go: it submits
      // exactly what the planner expects of it.
      out[i] = expected[i];
      continue;
    }
    SelfReport& rep = out[i];
    rep.robot = i;
    rep.time = t;
    rep.move_ok = actual[i] == plan.at(i, t);
    for (RobotId j = 0; j < R; ++j) {
      if (j == i) continue;
      if (w.adjacent(actual[i], actual[j]))
        rep.observations.push_back({i, j, actual[j], t});
    }
    sort_observations(rep.observations);
  }
  return out;
}

std::vector<Anomaly> detect(const std::vector<SelfReport>& expected,
                            const std::vector<SelfReport>& received,
                            bool ignore_observations) {
  std::vector<Anomaly> out;
  for (size_t i = 0; i < expected.size(); ++i) {
    const SelfReport& e = expected[i];
    const SelfReport& r = received[i];
    if (e.move_ok && !r.move_ok)
      out.push_back({e.robot, AnomalyReason::MoveFail});
    if (ignore_observations) continue;
    bool missed = false, unexpected = false;
    // Walk both observation lists keyed by observed robot.
    size_t a = 0, b = 0;
    while (a < e.observations.size() || b < r.observations.size()) {
      if (b >= r.observations.size() ||
          (a < e.observations.size() &&
           e.observations[a].observed < r.observations[b].observed)) {
        missed = true;  // scheduled sighting never reported
        ++a;
      } else if (a >= e.observations.size() ||
                 r.observations[b].observed < e.observations[a].observed) {
        unexpected = true;  // reported sighting nobody scheduled
        ++b;
      } else {
        if (e.observations[a].location != r.observations[b].location)
          unexpected = true;  // right robot, wrong place
        ++a;
        ++b;
      }
    }
    if (missed) out.push_back({e.robot, AnomalyReason::MissedObservation});
    if (unexpected)
      out.push_back({e.robot, AnomalyReason::UnexpectedObservation});
  }
  return out;
}

std::optional<PlanError> validate_deviation(const GridWorld& w,
                                            const MapfPlan& plan,
                                            const Deviation& d) {
  const int R = plan.num_robots();
  const int T = plan.horizon();
  if (d.robot < 0 || d.robot >= R)
    return PlanError{PlanViolation::Structure, 0, d.robot, -1,
                     "unknown robot"};
  if (d.window_start < 0 || d.window_end > T ||
      d.window_end - d.window_start < 2)
    return PlanError{PlanViolation::Structure, d.window_start, d.robot, -1,
                     "window must satisfy 0 <= s < s+2 <= f <= T"};
  if (static_cast<int>(d.interior.size()) !=
      d.window_end - d.window_start - 1)
    return PlanError{PlanViolation::Structure, d.window_start, d.robot, -1,
                     "interior length does not match window"};
  bool differs = false;
  for (Timestep t = d.window_start + 1; t < d.window_end; ++t) {
    CellId v = d.at(plan, t);
    if (v < 0 || v >= w.num_cells())
      return PlanError{PlanViolation::Structure, t, d.robot, -1,
                       "cell id out of range"};
    if (v != plan.at(d.robot, t)) differs = true;
  }
  if (!differs)
    return PlanError{PlanViolation::Structure, d.window_start, d.robot, -1,
                     "deviation equals the plan"};
  for (Timestep t = d.window_start; t < d.window_end; ++t) {
    if (!w.adjacent(d.at(plan, t), d.at(plan, t + 1)))
      return PlanError{PlanViolation::Walk, t, d.robot, -1,
                       "step is not a motion edge"};
  }
  for (Timestep t = d.window_start; t <= d.window_end; ++t) {
    for (RobotId j = 0; j < R; ++j) {
      if (j == d.robot) continue;
      if (d.at(plan, t) == plan.at(j, t))
        return PlanError{PlanViolation::Vertex, t, d.robot, j,
                         "deviation collides with planned path"};
      if (t < d.window_end && d.at(plan, t + 1) == plan.at(j, t) &&
          plan.at(j, t + 1) == d.at(plan, t))
        return PlanError{PlanViolation::Edge, t, d.robot, j,
                         "deviation swaps with planned path"};
    }
  }
  return std::nullopt;
}

bool is_forbidden_deviation(const GridWorld& w, const MapfPlan& plan,
                            const Deviation& d) {
  for (Timestep t = d.window_start + 1; t < d.window_end; ++t)
    if (w.forbidden().test(d.at(plan, t))) return true;
  return false;
}

MapfPlan apply_deviation(const MapfPlan& plan, const Deviation& d) {
  MapfPlan out = plan;
  for (Timestep t = d.window_start + 1; t < d.window_end; ++t)
    out.paths[d.robot][t] = d.interior[t - d.window_start - 1];
  return out;
}

}  // namespace hola
