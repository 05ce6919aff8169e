#include "hola/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>

namespace hola {

namespace {

void check_contract(const MapfPlan& plan, const Announcement& ann,
                    RobotId attacker) {
  const int R = plan.num_robots();
  const Timestep T = plan.horizon();
  if (R == 0) throw std::invalid_argument("verify: plan has no robots");
  if (attacker < 0 || attacker >= R)
    throw std::invalid_argument("verify: unknown attacker id " +
                                std::to_string(attacker));
  if (static_cast<int>(ann.horizon.size()) != R)
    throw std::invalid_argument(
        "verify: announcement robot count does not match plan");
  if (ann.t < 0 || ann.t > T)
    throw std::invalid_argument("verify: announcement time outside plan");
  for (RobotId i = 0; i < R; ++i)
    if (ann.horizon[i] < ann.t || ann.horizon[i] > T)
      throw std::invalid_argument(
          "verify: horizon for robot " + std::to_string(i) +
          " outside [announcement time, plan horizon]");
}

// Forward step of the non-deterministic movement abstraction. Robots whose
// next move is announced step deterministically along the plan; every robot
// past its horizon fans out from its candidate set to the free neighborhood,
// minus cells that would certainly collide with an announced move and minus
// recorded dead-end cells. A candidate with no legal successor is a dead end:
// it is recorded and the whole derivation restarts. The mutual-exclusion
// rules between the attacker's candidates and the defenders' candidates
// apply only to unannounced movement; announced positions are exact and are
// never pruned.
struct StepTables {
  CellSet det_next;             // cells occupied by announced moves at u+1
  std::vector<CellId> swap_src; // per entered cell: the cell it is left from
};

class SweepEngine {
 public:
  SweepEngine(const GridWorld& w, const MapfPlan& plan, const Announcement& ann,
              RobotId attacker)
      : w_(w), plan_(plan), ann_(ann), attacker_(attacker),
        T_(plan.horizon()) {}

  ReachProfile run() {
    ReachProfile out;
    out.s = ann_.t;
    out.attacker = attacker_;
    dead_ends_.assign(T_ + 1, w_.empty_set());
    int restarts = 0;
    const int restart_cap = w_.num_cells() * (T_ + 2) + 1;
    while (!sweep(out)) {
      if (++restarts > restart_cap)
        throw std::logic_error("verify: dead-end restarts exceeded bound");
    }
    out.restarts = restarts;
    return out;
  }

 private:
  // One full derivation attempt; false means a new dead end was recorded.
  bool sweep(ReachProfile& out) {
    const Timestep s = ann_.t;
    CellSet xa = w_.empty_set();     // attacker candidates
    CellSet xd_nd = w_.empty_set();  // union of unannounced defender clouds
    xa.set(plan_.at(attacker_, s));

    out.u_star = -1;
    out.q = w_.empty_set();
    out.zones.assign(1, w_.empty_set());

    CellSet xa_next = w_.empty_set();
    CellSet nd_src = w_.empty_set();
    CellSet nd_next = w_.empty_set();
    CellSet xd = w_.empty_set();
    CellSet zone = w_.empty_set();
    for (Timestep u = s; u < T_; ++u) {
      build_tables(u);
      // Defenders whose move to u+1 is unannounced fan out; one crossing its
      // horizon right now seeds its cloud with its last announced cell.
      nd_src = xd_nd;
      for (RobotId r = 0; r < plan_.num_robots(); ++r)
        if (r != attacker_ && ann_.horizon[r] == u) nd_src.set(plan_.at(r, u));
      const bool attacker_nd = ann_.horizon[attacker_] <= u;
      if (attacker_nd) {
        if (!advance(xa, u, xa_next)) return false;
        // Cannot trail a defender whose move is unknown: it might swap.
        xa_next -= nd_src;
      } else {
        xa_next.clear();
        xa_next.set(plan_.at(attacker_, u + 1));
      }
      if (!advance(nd_src, u, nd_next)) return false;
      nd_next -= xa_next;  // unannounced defenders yield to attacker cells
      if (attacker_nd) xa_next -= nd_next;  // and vice versa, closing the loop
      xa.swap(xa_next);
      xd_nd.swap(nd_next);

      // Full defender position set at u+1: announced cells plus the clouds.
      xd = xd_nd;
      for (RobotId r = 0; r < plan_.num_robots(); ++r)
        if (r != attacker_ && ann_.horizon[r] >= u + 1)
          xd.set(plan_.at(r, u + 1));

      w_.neighborhood_into(xd, GraphKind::Sensor, zone);
      out.zones.push_back(zone);
      if (xa.intersects(zone)) {
        out.u_star = u + 1;
        w_.neighborhood_into(xd, GraphKind::Motion, out.q);
        out.q &= xa;
        return true;
      }
    }
    return true;  // mission ended with no possible observation
  }

  void build_tables(Timestep u) {
    const int V = w_.num_cells();
    tables_.swap_src.assign(V, -1);
    tables_.det_next = w_.empty_set();
    for (RobotId r = 0; r < plan_.num_robots(); ++r) {
      if (ann_.horizon[r] < u + 1) continue;  // move to u+1 not announced
      CellId from = plan_.at(r, u);
      CellId to = plan_.at(r, u + 1);
      tables_.det_next.set(to);
      if (from != to) tables_.swap_src[to] = from;
    }
  }

  bool advance(const CellSet& x, Timestep u, CellSet& next) {
    next.clear();
    bool dead = false;
    CellId dead_cell = -1;
    x.for_each([&](CellId v) {
      if (dead) return;
      CellSet kids = w_.neighbor_mask(v);
      kids -= tables_.det_next;
      if (tables_.det_next.test(v) && tables_.swap_src[v] >= 0)
        kids.reset(tables_.swap_src[v]);
      kids -= dead_ends_[u + 1];
      if (kids.none()) {
        dead = true;
        dead_cell = v;
        return;
      }
      next |= kids;
    });
    if (dead) {
      dead_ends_[u].set(dead_cell);
      return false;
    }
    return true;
  }

  const GridWorld& w_;
  const MapfPlan& plan_;
  const Announcement& ann_;
  RobotId attacker_;
  Timestep T_;
  StepTables tables_;
  std::vector<CellSet> dead_ends_;  // per timestep: cells with no successor
};

}  // namespace

ReachProfile reach_profile(const GridWorld& w, const MapfPlan& plan,
                           const Announcement& ann, RobotId attacker) {
  check_contract(plan, ann, attacker);
  return SweepEngine(w, plan, ann, attacker).run();
}

VerifyOutcome attack_check(const GridWorld& w, const MapfPlan& plan,
                           const Announcement& /*ann*/, RobotId attacker,
                           const ReachProfile& profile) {
  const Timestep s = profile.s;
  const Timestep end = profile.u_star >= 0 ? profile.u_star : plan.horizon();

  VerifyOutcome out;
  out.u_star = profile.u_star;
  out.rendezvous = profile.q.to_vector();
  out.restarts = profile.restarts;

  CellSet reach = w.empty_set();  // certainly-unobserved positions
  CellSet carry = w.empty_set();  // same, having visited a forbidden cell
  reach.set(plan.at(attacker, s));
  bool rejoined = false;
  CellSet tmp = w.empty_set();

  for (Timestep u = s + 1; u <= end; ++u) {
    w.neighborhood_into(reach, GraphKind::Motion, tmp);
    reach.swap(tmp);
    w.neighborhood_into(carry, GraphKind::Motion, tmp);
    carry.swap(tmp);
    // A forbidden-visiting unobserved excursion stepping back onto the
    // attacker's planned cell is a completed deviation. Being observed at
    // that cell is consistent with the nominal plan at any time, inside or
    // beyond the announced horizon, so the check runs before zone pruning.
    if (carry.test(plan.at(attacker, u))) rejoined = true;
    // Inside the window the excursion must stay out of every possibly
    // observed zone; at a rendezvous step the attacker re-enters the zone
    // to be seen where expected.
    if (profile.u_star < 0 || u < profile.u_star) {
      reach -= profile.zones[u - s];
      carry -= profile.zones[u - s];
      carry |= set_intersection(reach, w.forbidden());
    }
  }

  bool secure;
  if (profile.u_star >= 0) {
    CellSet clean = profile.q;
    clean -= carry;
    secure = !rejoined && clean.any();
  } else {
    // No co-observation can ever happen. A deviation still has to end back
    // on the planned path; a forbidden cell that is reachable unobserved
    // but admits no unobserved return is not a completed attack.
    secure = !rejoined;
  }
  out.verdict = secure ? Verdict::Secure : Verdict::NotVerified;
  return out;
}

VerifyOutcome verify_announcement(const GridWorld& w, const MapfPlan& plan,
                                  const Announcement& ann, RobotId attacker) {
  ReachProfile profile = reach_profile(w, plan, ann, attacker);
  return attack_check(w, plan, ann, attacker, profile);
}

namespace {

// Shared driver: `only < 0` covers every robot as the prospective attacker,
// otherwise just that one.
ScheduleVerdict run_schedule(const GridWorld& w, const MapfPlan& plan,
                             const std::vector<Announcement>& schedule,
                             RobotId only, int workers) {
  const int R = plan.num_robots();
  const Timestep T = plan.horizon();
  if (schedule.empty())
    throw std::invalid_argument("verify: empty announcement schedule");
  for (size_t m = 0; m < schedule.size(); ++m) {
    if (m > 0 && schedule[m].t <= schedule[m - 1].t)
      throw std::invalid_argument(
          "verify: announcement times must be strictly increasing");
  }
  if (schedule.front().t != 0)
    throw std::invalid_argument(
        "verify: schedule must start with an announcement at time 0");
  if (only >= R)
    throw std::invalid_argument("verify: attacker id unknown");

  auto start = std::chrono::steady_clock::now();
  ScheduleVerdict verdict;
  // Deviations need at least a two-step window, so starts beyond T-2 are
  // vacuous and skipped.
  for (Timestep s = 0; s + 2 <= T; ++s) {
    if (only >= 0) {
      verdict.cells.push_back({s, only, {}});
      continue;
    }
    for (RobotId a = 0; a < R; ++a)
      verdict.cells.push_back({s, a, {}});
  }

  auto in_force = [&](Timestep s) -> const Announcement& {
    size_t lo = 0;
    for (size_t m = 1; m < schedule.size() && schedule[m].t <= s; ++m) lo = m;
    return schedule[lo];
  };

  auto run_cell = [&](ScheduleCell& cell) {
    Announcement ann = in_force(cell.s);
    ann.t = cell.s;  // the view at the deviation start, not at the epoch
    cell.outcome = verify_announcement(w, plan, ann, cell.attacker);
  };

  int n = static_cast<int>(verdict.cells.size());
  int pool = std::max(1, workers);
  if (pool <= 1 || n <= 1) {
    for (auto& cell : verdict.cells) run_cell(cell);
  } else {
    std::atomic<int> cursor{0};
    auto worker = [&]() {
      for (;;) {
        int i = cursor.fetch_add(1);
        if (i >= n) return;
        run_cell(verdict.cells[i]);
      }
    };
    std::vector<std::thread> threads;
    int count = std::min(pool, n);
    threads.reserve(count);
    for (int i = 0; i < count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (const auto& cell : verdict.cells)
    if (!cell.outcome.secure()) verdict.secure = false;
  verdict.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return verdict;
}

std::vector<Announcement> pk_schedule(const MapfPlan& plan,
                                      const PkPolicy& policy) {
  std::vector<Announcement> schedule;
  const Timestep T = plan.horizon();
  for (Timestep t = 0; t <= T; t += policy.p)
    schedule.push_back(slice_announcement(plan, policy, t));
  if (schedule.empty()) schedule.push_back(full_announcement(plan, 0));
  return schedule;
}

}  // namespace

ScheduleVerdict verify_schedule(const GridWorld& w, const MapfPlan& plan,
                                const std::vector<Announcement>& schedule,
                                int workers) {
  return run_schedule(w, plan, schedule, -1, workers);
}

ScheduleVerdict verify_schedule(const GridWorld& w, const MapfPlan& plan,
                                const PkPolicy& policy, int workers) {
  return run_schedule(w, plan, pk_schedule(plan, policy), -1, workers);
}

ScheduleVerdict verify_attacker_schedule(
    const GridWorld& w, const MapfPlan& plan,
    const std::vector<Announcement>& schedule, RobotId attacker,
    int workers) {
  if (attacker < 0) throw std::invalid_argument("verify: attacker id unknown");
  return run_schedule(w, plan, schedule, attacker, workers);
}

ScheduleVerdict verify_attacker_schedule(const GridWorld& w,
                                         const MapfPlan& plan,
                                         const PkPolicy& policy,
                                         RobotId attacker, int workers) {
  if (attacker < 0) throw std::invalid_argument("verify: attacker id unknown");
  return run_schedule(w, plan, pk_schedule(plan, policy), attacker, workers);
}

SynthesizedAnnouncement synthesize_max_announcement(const GridWorld& w,
                                                    const MapfPlan& plan,
                                                    Timestep t, Timestep k_max,
                                                    int workers) {
  const int R = plan.num_robots();
  const Timestep T = plan.horizon();
  if (t < 0 || t > T)
    throw std::invalid_argument("synthesize: time outside plan");
  k_max = std::max<Timestep>(1, k_max);

  auto all_secure = [&](const Announcement& ann) {
    if (workers <= 1 || R <= 1) {
      for (RobotId a = 0; a < R; ++a)
        if (!verify_announcement(w, plan, ann, a).secure()) return false;
      return true;
    }
    std::atomic<int> cursor{0};
    std::atomic<bool> ok{true};
    auto worker = [&]() {
      for (;;) {
        int a = cursor.fetch_add(1);
        if (a >= R || !ok.load()) return;
        if (!verify_announcement(w, plan, ann, a).secure()) ok.store(false);
      }
    };
    std::vector<std::thread> threads;
    int count = std::min(workers, R);
    threads.reserve(count);
    for (int i = 0; i < count; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
    return ok.load();
  };

  for (Timestep k = k_max; k >= 1; --k) {
    Announcement ann = uniform_announcement(plan, t, std::min(T, t + k));
    if (all_secure(ann)) return {ann, k, true};
  }
  return {uniform_announcement(plan, t, std::min(T, t + 1)), 1, false};
}

}  // namespace hola
