#include "hola/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <utility>

#include "hola/rng.hpp"
#include "hola/solver.hpp"
#include "hola/verify.hpp"

namespace hola {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string zero_pad(int value, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

}  // namespace

Timestep max_inter_observation(const GridWorld& w, const MapfPlan& plan,
                               RobotId robot) {
  const int R = plan.num_robots();
  const Timestep T = plan.horizon();
  Timestep best = 0, prev = 0;
  for (Timestep t = 0; t <= T; ++t) {
    bool observed = false;
    for (RobotId j = 0; j < R && !observed; ++j)
      if (j != robot && w.adjacent(plan.at(j, t), plan.at(robot, t)))
        observed = true;
    if (observed) {
      best = std::max(best, t - prev);
      prev = t;
    }
  }
  return std::max(best, T - prev);
}

MetricsRecord run_simulation(const Scenario& s, const SimOptions& opt) {
  const auto sim_start = Clock::now();
  const GridWorld& w = s.world;
  const MapfPlan& plan = s.plan;
  const int R = plan.num_robots();
  const Timestep T = plan.horizon();
  const RobotId a =
      s.attacker.kind == AttackerKind::None ? -1 : s.attacker.robot;
  if (a >= R) throw std::invalid_argument("simulation: attacker id out of range");

  MetricsRecord rec;
  rec.scenario_id = s.id;
  rec.robots = R;
  switch (s.policy.kind) {
    case PolicyKind::Full:
      break;  // p = k = 0 marks the one-shot full release
    case PolicyKind::Pk:
      rec.policy_p = s.policy.p;
      rec.policy_k = s.policy.k;
      break;
    case PolicyKind::Synth:
      rec.policy_k = s.policy.k_max;
      break;
  }
  rec.attacker_kind = s.attacker.kind;
  rec.max_inter_obs = a >= 0 ? max_inter_observation(w, plan, a) : 0;

  double verify_ms = 0.0;
  const auto expected = expected_reports(w, plan);

  std::vector<CellId> actual(R);
  for (RobotId i = 0; i < R; ++i) actual[i] = plan.at(i, 0);

  Announcement ann;  // announcement currently in force
  std::vector<Announcement> epochs;
  bool all_epochs_verified = true;
  Timestep next_epoch = 0;
  std::optional<Deviation> committed;  // stealthy attacker's current window
  bool entered_forbidden = false;
  std::optional<Timestep> first_det;

  auto maybe_announce = [&](Timestep t) {
    bool fresh = false;
    switch (s.policy.kind) {
      case PolicyKind::Full:
        if (t == 0) {
          ann = full_announcement(plan, 0);
          fresh = true;
        }
        break;
      case PolicyKind::Pk:
        if (t % s.policy.p == 0 && t < T) {
          ann = slice_announcement(plan, {s.policy.p, s.policy.k}, t);
          fresh = true;
        }
        break;
      case PolicyKind::Synth:
        if (t == next_epoch && t < T) {
          const auto v0 = Clock::now();
          auto syn =
              synthesize_max_announcement(w, plan, t, s.policy.k_max,
                                          opt.workers);
          verify_ms += ms_since(v0);
          ann = syn.announcement;
          all_epochs_verified = all_epochs_verified && syn.verified;
          next_epoch = std::max(ann.horizon[0], t + 1);
          fresh = true;
        }
        break;
    }
    if (fresh) {
      epochs.push_back(ann);
      if (s.attacker.kind == AttackerKind::Stealthy &&
          (!committed || t >= committed->window_end)) {
        auto dev = stealthy_find_attack(w, plan, ann, a);
        if (dev) committed = dev;
      }
    }
  };

  for (Timestep t = 0;; ++t) {
    maybe_announce(t);

    auto received = reports_at(w, plan, actual, t, a, expected[t]);
    auto anomalies = detect(expected[t], received, opt.ignore_observations);
    if (!anomalies.empty() && !first_det) first_det = t;

    if (t == T) break;

    // Choose targets for the step t -> t+1.
    std::vector<CellId> fin(R);
    for (RobotId j = 0; j < R; ++j) {
      if (j == a) continue;
      // Honest robots follow the plan; once knocked off it they freeze
      // (their move failures keep surfacing in reports).
      fin[j] = actual[j] == plan.at(j, t) ? plan.at(j, t + 1) : actual[j];
    }
    if (a >= 0) {
      if (s.attacker.kind == AttackerKind::Stealthy)
        fin[a] = committed ? committed->at(plan, t + 1) : plan.at(a, t + 1);
      else
        fin[a] = bold_plan_step(w, plan, ann, a, actual[a], t,
                                entered_forbidden);
      // Honest robots shy away from the attacker: a move into its target
      // cell or across its edge is abandoned.
      for (RobotId j = 0; j < R; ++j) {
        if (j == a || fin[j] == actual[j]) continue;
        if (fin[j] == fin[a] ||
            (fin[j] == actual[a] && fin[a] == actual[j]))
          fin[j] = actual[j];
      }
      // A mover (attacker included) cannot enter a cell that stays
      // occupied; blockings cascade deterministically.
      bool changed = true;
      while (changed) {
        changed = false;
        for (RobotId r = 0; r < R; ++r) {
          if (fin[r] == actual[r]) continue;
          for (RobotId r2 = 0; r2 < R; ++r2) {
            if (r2 != r && fin[r2] == actual[r2] && fin[r] == actual[r2]) {
              fin[r] = actual[r];
              changed = true;
              break;
            }
          }
        }
      }
    }
    actual = std::move(fin);
    if (a >= 0 && w.forbidden().test(actual[a])) entered_forbidden = true;
  }

  rec.attack_success = entered_forbidden;
  rec.first_detection_t = first_det;
  rec.detection_missed = rec.attack_success && !first_det.has_value();

  if (s.attacker.kind == AttackerKind::Stealthy && a >= 0) {
    // The scenario's security metric: can the one compromised robot be
    // verified at every deviation start? Other robots are not suspects here.
    const auto v0 = Clock::now();
    ScheduleVerdict verdict =
        s.policy.kind == PolicyKind::Pk
            ? verify_attacker_schedule(w, plan,
                                       PkPolicy{s.policy.p, s.policy.k}, a,
                                       opt.workers)
            : verify_attacker_schedule(w, plan, epochs, a, opt.workers);
    verify_ms += ms_since(v0);
    rec.secure_verdict = verdict.secure;
  } else if (s.policy.kind == PolicyKind::Synth) {
    rec.secure_verdict = all_epochs_verified;
  }

  rec.verify_ms = verify_ms;
  rec.sim_ms = ms_since(sim_start) - verify_ms;
  return rec;
}

std::vector<Scenario> generate_scenarios(const GenerateParams& params) {
  if (params.size < 2 || params.robots < 1 || params.count < 0 ||
      params.obstacles < 0 ||
      params.obstacles >= params.size * params.size)
    throw std::runtime_error("scenario generation: invalid parameters");

  Rng master(params.seed);
  std::vector<Scenario> out;
  out.reserve(params.count);

  for (int idx = 0; idx < params.count; ++idx) {
    const uint64_t scenario_seed = master.next();
    bool made = false;
    for (int attempt = 0; attempt < params.max_attempts && !made; ++attempt) {
      Rng rng = Rng(scenario_seed).fork(attempt);

      // Exact obstacle count: shuffle all cells, block the prefix.
      const int total = params.size * params.size;
      std::vector<int> order(total);
      for (int i = 0; i < total; ++i) order[i] = i;
      rng.shuffle(order);
      std::vector<RowCol> blocked;
      blocked.reserve(params.obstacles);
      for (int i = 0; i < params.obstacles; ++i)
        blocked.push_back({order[i] / params.size, order[i] % params.size});
      GridWorld world(params.size, params.size, blocked);

      // Endpoints must share one connected free component.
      const int V = world.num_cells();
      std::vector<int> comp(V, -1);
      int best_comp = -1, best_size = 0;
      for (CellId v = 0; v < V; ++v) {
        if (comp[v] >= 0) continue;
        int size = 0;
        std::vector<CellId> stack{v};
        comp[v] = v;
        while (!stack.empty()) {
          CellId c = stack.back();
          stack.pop_back();
          ++size;
          for (CellId n : world.motion_neighbors(c))
            if (comp[n] < 0) {
              comp[n] = v;
              stack.push_back(n);
            }
        }
        if (size > best_size) {
          best_size = size;
          best_comp = v;
        }
      }
      if (best_size < 2 * params.robots + 12) continue;
      std::vector<CellId> pool;
      pool.reserve(best_size);
      for (CellId v = 0; v < V; ++v)
        if (comp[v] == best_comp) pool.push_back(v);
      rng.shuffle(pool);

      MapfInstance inst;
      inst.world = &world;
      inst.starts.assign(pool.begin(), pool.begin() + params.robots);
      inst.goals.assign(pool.begin() + params.robots,
                        pool.begin() + 2 * params.robots);
      auto solved = plan_ecbs(inst);
      if (solved.status != SolveStatus::Ok) continue;

      // Forbidden candidates live off every planned path, so the nominal
      // plan never enters the forbidden cell.
      CellSet on_path = world.empty_set();
      for (const auto& path : solved.plan.paths)
        for (CellId c : path) on_path.set(c);
      std::vector<CellId> forb_pool;
      for (size_t i = 2 * params.robots; i < pool.size(); ++i)
        if (!on_path.test(pool[i])) forb_pool.push_back(pool[i]);
      if (forb_pool.empty()) continue;
      if (forb_pool.size() > 10) forb_pool.resize(10);

      std::vector<RobotId> atk_pool(params.robots);
      for (int i = 0; i < params.robots; ++i) atk_pool[i] = i;
      rng.shuffle(atk_pool);
      if (atk_pool.size() > 10) atk_pool.resize(10);

      Scenario sc;
      sc.id = zero_pad(idx, 4);
      sc.starts = inst.starts;
      sc.goals = inst.goals;
      sc.plan = std::move(solved.plan);
      sc.policy = params.policy;
      sc.attacker.kind = params.attacker_kind;
      sc.attacker.robot =
          params.attacker_kind == AttackerKind::None
              ? -1
              : atk_pool[rng.below(atk_pool.size())];
      sc.forbidden = forb_pool[rng.below(forb_pool.size())];
      sc.seed = scenario_seed;
      sc.attacker_candidates = std::move(atk_pool);
      sc.forbidden_candidates = std::move(forb_pool);
      world.set_forbidden({sc.forbidden});
      sc.world = std::move(world);
      out.push_back(std::move(sc));
      made = true;
    }
    if (!made)
      throw std::runtime_error(
          "scenario generation: retry budget exhausted at instance " +
          std::to_string(idx));
  }
  return out;
}

std::vector<AggregateRow> compute_metrics(
    const std::vector<MetricsRecord>& records, GroupBy group_by) {
  if (records.empty())
    throw std::invalid_argument("compute_metrics: no records");

  auto key_of = [&](const MetricsRecord& r) -> std::string {
    switch (group_by) {
      case GroupBy::None:
        return "all";
      case GroupBy::Robots:
        return zero_pad(r.robots, 4);
      case GroupBy::Policy:
        return "p" + std::to_string(r.policy_p) + "k" +
               std::to_string(r.policy_k);
      case GroupBy::InterObsBin: {
        const int lo = (r.max_inter_obs / 5) * 5;
        return zero_pad(lo, 3) + "-" + zero_pad(lo + 4, 3);
      }
    }
    return "all";
  };

  std::map<std::string, std::vector<const MetricsRecord*>> groups;
  for (const auto& r : records) groups[key_of(r)].push_back(&r);

  std::vector<AggregateRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, list] : groups) {
    AggregateRow row;
    row.group = key;
    row.count = static_cast<int>(list.size());
    int verified = 0;
    int missed = 0;
    for (const auto* r : list) {
      if (r->secure_verdict) {
        ++row.with_verdict;
        if (*r->secure_verdict) ++verified;
      }
      if (r->attack_success) {
        ++row.positives;
        if (r->detection_missed) ++missed;
      }
    }
    row.secure_rate =
        row.with_verdict ? static_cast<double>(verified) / row.with_verdict
                         : 0.0;
    row.attack_success_rate = static_cast<double>(row.positives) / row.count;
    row.detection_miss_rate =
        row.positives ? static_cast<double>(missed) / row.positives : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hola
