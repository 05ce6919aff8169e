#include "hola/adversary.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <unordered_set>
#include <vector>

namespace hola {

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

void check_attacker(const MapfPlan& plan, const Announcement& ann,
                    RobotId attacker) {
  const int R = plan.num_robots();
  if (attacker < 0 || attacker >= R)
    throw std::invalid_argument("adversary: unknown attacker id");
  if (static_cast<int>(ann.horizon.size()) != R)
    throw std::invalid_argument(
        "adversary: announcement robot count does not match plan");
}

inline uint32_t pack_move(CellId from, CellId to) {
  return (static_cast<uint32_t>(from) << 12) | static_cast<uint32_t>(to);
}

std::vector<int> bfs_from_set(const GridWorld& w,
                              const std::vector<CellId>& sources) {
  std::vector<int> dist(w.num_cells(), kInf);
  std::deque<CellId> queue;
  for (CellId s : sources) {
    if (dist[s] == kInf) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    CellId v = queue.front();
    queue.pop_front();
    for (CellId m : w.motion_neighbors(v))
      if (dist[m] == kInf) {
        dist[m] = dist[v] + 1;
        queue.push_back(m);
      }
  }
  return dist;
}

}  // namespace

std::optional<Deviation> stealthy_find_attack(const GridWorld& w,
                                              const MapfPlan& plan,
                                              const Announcement& ann,
                                              RobotId attacker) {
  check_attacker(plan, ann, attacker);
  const Timestep s = ann.t;
  const Timestep window_end = ann.min_horizon();
  if (window_end < s + 2) return std::nullopt;
  const int R = plan.num_robots();
  const int V = w.num_cells();
  const CellSet& forb = w.forbidden();

  // Per step u in (s, window_end]: cells the deviating attacker may occupy
  // without producing a report mismatch, and moves banned because an
  // announced robot crosses the same edge the opposite way.
  const int len = window_end - s;
  std::vector<CellSet> allowed(len + 1, w.empty_set());
  std::vector<std::unordered_set<uint32_t>> banned(len + 1);
  for (Timestep u = s + 1; u <= window_end; ++u) {
    bool scheduled = false;
    CellSet sensed = w.empty_set();
    for (RobotId j = 0; j < R; ++j) {
      if (j == attacker) continue;
      CellId cj = plan.at(j, u);
      if (w.adjacent(plan.at(attacker, u), cj)) scheduled = true;
      sensed |= w.neighbor_mask(cj);
      CellId pj = plan.at(j, u - 1);
      if (pj != cj) banned[u - s].insert(pack_move(cj, pj));
    }
    if (scheduled) {
      allowed[u - s].set(plan.at(attacker, u));
    } else {
      for (CellId v = 0; v < V; ++v)
        if (!sensed.test(v)) allowed[u - s].set(v);
    }
  }

  // Forward reachability, split by whether a forbidden cell was already
  // visited. The final rejoin transition is applied separately so a visit
  // at the rejoin step itself does not count as an interior visit.
  std::vector<std::array<CellSet, 2>> reach(
      len + 1, {w.empty_set(), w.empty_set()});
  reach[0][0].set(plan.at(attacker, s));

  auto expand = [&](Timestep u) {  // u -> u+1, both relative offsets + s
    int d = u - s;
    for (int vis = 0; vis < 2; ++vis) {
      reach[d + 1][vis].clear();
    }
    for (int vis = 0; vis < 2; ++vis) {
      reach[d][vis].for_each([&](CellId v) {
        for (CellId c : w.motion_neighbors(v)) {
          if (!allowed[d + 1].test(c)) continue;
          if (!banned[d + 1].empty() &&
              banned[d + 1].count(pack_move(v, c)))
            continue;
          int nvis = vis | (forb.test(c) ? 1 : 0);
          reach[d + 1][nvis].set(c);
        }
      });
    }
  };

  auto valid_step = [&](CellId v, CellId c, int d) {
    return w.adjacent(v, c) && allowed[d].test(c) &&
           (banned[d].empty() || !banned[d].count(pack_move(v, c)));
  };

  for (Timestep f = s + 2; f <= window_end; ++f) {
    expand(f - 2);  // ensures reach is filled through offset f-1
    CellId target = plan.at(attacker, f);
    CellId arrive_from = -1;
    reach[f - 1 - s][1].for_each([&](CellId v) {
      if (arrive_from < 0 && valid_step(v, target, f - s)) arrive_from = v;
    });
    if (arrive_from < 0) continue;

    // Reconstruct backward, smallest predecessor cell first, preferring the
    // not-yet-visited branch.
    Deviation dev;
    dev.robot = attacker;
    dev.window_start = s;
    dev.window_end = f;
    dev.interior.assign(f - s - 1, -1);
    CellId cur = arrive_from;
    int vis = 1;
    for (Timestep u = f - 1; u > s; --u) {
      dev.interior[u - s - 1] = cur;
      int d = u - s;
      int vis_prev = forb.test(cur) ? 0 : vis;
      CellId pred = -1;
      for (int attempt = 0; attempt < 2 && pred < 0; ++attempt) {
        int want = attempt == 0 ? vis_prev : vis;
        if (attempt == 1 && (vis_prev == vis || !forb.test(cur))) break;
        for (CellId v : w.motion_neighbors(cur)) {
          if (!reach[d - 1][want].test(v)) continue;
          if (!valid_step(v, cur, d)) continue;
          pred = v;
          vis = want;
          break;
        }
      }
      cur = pred;
    }
    return dev;
  }
  return std::nullopt;
}

CellId bold_plan_step(const GridWorld& w, const MapfPlan& plan,
                      const Announcement& ann, RobotId attacker,
                      CellId current, Timestep t, bool visited_forbidden) {
  check_attacker(plan, ann, attacker);
  const int R = plan.num_robots();
  const int V = w.num_cells();
  const Timestep E = ann.horizon[attacker];
  if (t >= E) return current;  // nothing announced to plan against

  std::vector<int> dist_forb = bfs_from_set(w, w.forbidden_cells());
  std::vector<int> dist_rejoin = bfs_from_set(w, {plan.at(attacker, E)});

  // No reachable target: degenerate to tracking the announced path (step
  // toward the next announced cell, smallest cell on ties).
  if (dist_forb[current] >= kInf && !visited_forbidden) {
    std::vector<int> dist_next = bfs_from_set(w, {plan.at(attacker, t + 1)});
    CellId best = current;
    for (CellId c : w.motion_neighbors(current))
      if (dist_next[c] < dist_next[best]) best = c;
    return best;
  }

  struct Value {
    int to_forbidden = kInf;
    int to_rejoin = kInf;
    int detections = kInf;
    bool operator<(const Value& o) const {
      return std::tie(to_forbidden, to_rejoin, detections) <
             std::tie(o.to_forbidden, o.to_rejoin, o.detections);
    }
  };

  const int len = E - t;
  // value[d][cell][vis], d relative to t.
  std::vector<std::vector<std::array<Value, 2>>> value(
      len + 1, std::vector<std::array<Value, 2>>(V));
  for (CellId v = 0; v < V; ++v) {
    value[len][v][0] = Value{dist_forb[v], 0, 0};
    value[len][v][1] = Value{0, dist_rejoin[v], 0};
  }

  const CellSet& forb = w.forbidden();
  // Physical overlap with an announced position (vertex or head-on swap)
  // both risks stalling the raid and surfaces in the blocked robot's action
  // report, so it outweighs merely being seen.
  constexpr int kContactWeight = 4;
  std::vector<int> events(V);
  std::vector<int> contact(V);
  std::vector<CellId> swap_to_from(V);
  int nsched = 0;
  CellId xa = -1;

  // Mismatch events caused by standing on cell m at step u+1, against the
  // announced positions only.
  auto build_step = [&](Timestep u) {
    std::fill(events.begin(), events.end(), 0);
    std::fill(contact.begin(), contact.end(), 0);
    std::fill(swap_to_from.begin(), swap_to_from.end(), -1);
    xa = plan.at(attacker, u + 1);
    nsched = 0;
    for (RobotId j = 0; j < R; ++j) {
      if (j == attacker || ann.horizon[j] < u + 1) continue;
      CellId cj = plan.at(j, u + 1);
      if (w.adjacent(xa, cj))
        ++nsched;  // j expects to see the attacker on its announced cell
      else
        w.neighbor_mask(cj).for_each([&](CellId m) { ++events[m]; });
      contact[cj] += kContactWeight;
      CellId pj = plan.at(j, u);
      if (pj != cj) swap_to_from[cj] = pj;
    }
  };

  auto step_value = [&](CellId v, int vis, int d, CellId& best_move) {
    Value best;
    best_move = -1;
    for (CellId c : w.motion_neighbors(v)) {
      int nvis = vis | (forb.test(c) ? 1 : 0);
      const Value& nxt = value[d + 1][c][nvis];
      Value cand{nxt.to_forbidden, nxt.to_rejoin,
                 nxt.detections + events[c] + (c == xa ? 0 : nsched) +
                     contact[c] + (swap_to_from[v] == c ? kContactWeight : 0)};
      if (cand < best) {
        best = cand;
        best_move = c;
      }
    }
    return best;
  };

  for (int d = len - 1; d >= 1; --d) {
    build_step(t + d);
    for (CellId v = 0; v < V; ++v)
      for (int vis = 0; vis < 2; ++vis) {
        CellId ignored;
        value[d][v][vis] = step_value(v, vis, d, ignored);
      }
  }

  build_step(t);
  CellId chosen = current;
  step_value(current, visited_forbidden ? 1 : 0, 0, chosen);
  if (chosen < 0) chosen = current;
  return chosen;
}

}  // namespace hola
