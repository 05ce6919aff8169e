#include "test_support.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unordered_map>
#include <unordered_set>

namespace test_support {

GridWorld make_world(const std::vector<std::string>& rows) {
  std::ostringstream map;
  map << "height " << rows.size() << "\nwidth " << rows[0].size() << "\nmap\n";
  for (const auto& r : rows) map << r << "\n";
  return GridWorld::parse_map(map.str());
}

GridWorld open_grid(int width, int height) {
  return GridWorld(width, height);
}

CellId cell(const GridWorld& w, int row, int col) {
  CellId c = w.cell_at(row, col);
  if (c < 0) throw std::runtime_error("fixture refers to a blocked cell");
  return c;
}

std::vector<CellId> path_of(const GridWorld& w,
                            const std::vector<std::pair<int, int>>& rcs) {
  std::vector<CellId> out;
  for (auto [r, c] : rcs) out.push_back(cell(w, r, c));
  return out;
}

MapfPlan plan_of(const GridWorld& w,
                 const std::vector<std::vector<std::pair<int, int>>>& paths) {
  MapfPlan plan;
  for (const auto& p : paths) plan.paths.push_back(path_of(w, p));
  return plan;
}

long long joint_optimal_cost(const MapfInstance& inst,
                             long long state_budget) {
  const GridWorld& w = *inst.world;
  const int R = inst.num_robots();
  const int V = w.num_cells();
  int width = 1;
  while ((1 << width) < V) ++width;
  if (R * width + R > 64) return -2;

  auto pack = [&](const std::vector<CellId>& cells, unsigned parked) {
    uint64_t key = parked;
    for (int i = 0; i < R; ++i)
      key |= static_cast<uint64_t>(cells[i]) << (R + i * width);
    return key;
  };

  using Entry = std::pair<long long, uint64_t>;  // (cost, packed state)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  std::unordered_map<uint64_t, long long> dist;

  // A robot already sitting on its goal may pay nothing by parking right
  // away, or keep moving (e.g. to let someone pass); seed both choices.
  unsigned at_goal = 0;
  for (int i = 0; i < R; ++i)
    if (inst.starts[i] == inst.goals[i]) at_goal |= 1u << i;
  for (unsigned sub = at_goal;; sub = (sub - 1) & at_goal) {
    const uint64_t start = pack(inst.starts, sub);
    dist[start] = 0;
    pq.push({0, start});
    if (sub == 0) break;
  }

  std::vector<CellId> cur(R), nxt(R);
  const unsigned all_parked = (1u << R) - 1;

  while (!pq.empty()) {
    auto [d, key] = pq.top();
    pq.pop();
    auto it = dist.find(key);
    if (it == dist.end() || it->second != d) continue;
    const unsigned parked = key & all_parked;
    if (parked == all_parked) return d;
    if (static_cast<long long>(dist.size()) > state_budget) return -2;
    for (int i = 0; i < R; ++i)
      cur[i] = static_cast<CellId>((key >> (R + i * width)) & ((1u << width) - 1));

    // Enumerate joint successors; parking (at the goal) is irreversible and
    // stops the per-step charge. Every robot unparked before the transition
    // pays one step — including its final arriving move — so the total is
    // the sum of final arrival times.
    std::function<void(int, unsigned)> rec = [&](int i, unsigned new_parked) {
      if (i == R) {
        long long nd = d;
        for (int r = 0; r < R; ++r)
          if (!(parked >> r & 1)) ++nd;
        const uint64_t nkey = pack(nxt, new_parked);
        auto f = dist.find(nkey);
        if (f == dist.end() || f->second > nd) {
          dist[nkey] = nd;
          pq.push({nd, nkey});
        }
        return;
      }
      auto try_choice = [&](CellId c, bool parks) {
        for (int j = 0; j < i; ++j) {
          if (nxt[j] == c) return;                      // vertex conflict
          if (c == cur[j] && nxt[j] == cur[i]) return;  // swap conflict
        }
        nxt[i] = c;
        rec(i + 1, parks ? (new_parked | (1u << i)) : new_parked);
      };
      if (parked >> i & 1) {
        try_choice(cur[i], true);
        return;
      }
      for (CellId c : w.motion_neighbors(cur[i])) {
        try_choice(c, false);
        if (c == inst.goals[i]) try_choice(c, true);
      }
    };
    rec(0, parked);
  }
  return -1;
}

namespace {

// Shared enumeration of viable joint configurations under an announcement:
// robots follow announced prefixes then move freely, conflict-free, and
// every kept configuration extends to the longest announced horizon.
struct Continuations {
  std::vector<std::vector<std::vector<CellId>>> layers;  // [d] -> configs
  std::vector<std::unordered_set<uint64_t>> honest_moves;  // packed from<<16|to
  Timestep s = 0;
};

uint64_t key_of(const std::vector<CellId>& cfg) {
  uint64_t h = 1469598103934665603ull;
  for (CellId c : cfg) {
    h ^= static_cast<uint64_t>(c) + 1;
    h *= 1099511628211ull;
  }
  return h;
}

Continuations enumerate_continuations(const GridWorld& w, const MapfPlan& plan,
                                      const Announcement& ann,
                                      RobotId attacker) {
  const int R = plan.num_robots();
  const Timestep s = ann.t;
  Timestep last = s;
  for (Timestep h : ann.horizon) last = std::max(last, h);

  Continuations out;
  out.s = s;
  const int L = last - s;
  out.layers.assign(L + 1, {});
  out.honest_moves.assign(std::max(0, L), {});

  std::vector<CellId> start(R);
  for (RobotId i = 0; i < R; ++i) start[i] = plan.at(i, s);
  out.layers[0].push_back(start);

  auto successors = [&](const std::vector<CellId>& cur, Timestep u,
                        auto&& sink) {
    std::vector<CellId> nxt(R);
    std::function<void(int)> rec = [&](int i) {
      if (i == R) {
        sink(nxt);
        return;
      }
      auto try_cell = [&](CellId c) {
        for (int j = 0; j < i; ++j) {
          if (nxt[j] == c) return;
          if (c == cur[j] && nxt[j] == cur[i]) return;
        }
        nxt[i] = c;
        rec(i + 1);
      };
      if (ann.horizon[i] >= u + 1)
        try_cell(plan.at(i, u + 1));
      else
        for (CellId c : w.motion_neighbors(cur[i])) try_cell(c);
    };
    rec(0);
  };

  for (int d = 0; d < L; ++d) {
    std::unordered_set<uint64_t> seen;
    for (const auto& cfg : out.layers[d])
      successors(cfg, s + d, [&](const std::vector<CellId>& nxt) {
        if (seen.insert(key_of(nxt)).second) out.layers[d + 1].push_back(nxt);
      });
  }

  // Backward viability: drop configs with no successor in the next layer.
  for (int d = L - 1; d >= 0; --d) {
    std::unordered_set<uint64_t> next_keys;
    for (const auto& cfg : out.layers[d + 1]) next_keys.insert(key_of(cfg));
    std::vector<std::vector<CellId>> kept;
    for (const auto& cfg : out.layers[d]) {
      bool ok = false;
      successors(cfg, s + d, [&](const std::vector<CellId>& nxt) {
        if (!ok && next_keys.count(key_of(nxt))) ok = true;
      });
      if (ok) kept.push_back(cfg);
    }
    out.layers[d] = std::move(kept);
  }

  // Honest moves realized by viable transitions.
  for (int d = 0; d < L; ++d) {
    std::unordered_set<uint64_t> next_keys;
    for (const auto& cfg : out.layers[d + 1]) next_keys.insert(key_of(cfg));
    for (const auto& cfg : out.layers[d])
      successors(cfg, s + d, [&](const std::vector<CellId>& nxt) {
        if (!next_keys.count(key_of(nxt))) return;
        for (RobotId j = 0; j < R; ++j)
          if (j != attacker)
            out.honest_moves[d].insert(
                (static_cast<uint64_t>(cfg[j]) << 16) |
                static_cast<uint64_t>(nxt[j]));
      });
  }
  return out;
}

}  // namespace

bool surely_undetected(const GridWorld& w, const MapfPlan& plan,
                       const Announcement& ann, const Deviation& dev) {
  const int R = plan.num_robots();
  const RobotId a = dev.robot;
  const Timestep s = dev.window_start;
  if (s != ann.t) return false;  // checker assumes the window starts at ann.t
  Continuations cont = enumerate_continuations(w, plan, ann, a);

  for (Timestep u = s + 1; u <= dev.window_end; ++u) {
    const CellId p = dev.at(plan, u);
    const CellId prev = dev.at(plan, u - 1);
    const int d = u - s;
    if (d >= static_cast<int>(cont.layers.size())) return false;
    // A possible honest move from p to prev would swap with the attacker.
    if (cont.honest_moves[d - 1].count((static_cast<uint64_t>(p) << 16) |
                                       static_cast<uint64_t>(prev)))
      return false;
    for (const auto& cfg : cont.layers[d]) {
      const CellId ca = cfg[a];
      for (RobotId j = 0; j < R; ++j) {
        if (j == a) continue;
        const bool sees_attacker_cell = w.adjacent(cfg[j], ca);
        const bool sees_actual = w.adjacent(cfg[j], p);
        if (sees_attacker_cell) {
          // Scheduled co-observation: only the exact announced cell passes.
          if (p != ca) return false;
        } else if (sees_actual) {
          return false;  // unscheduled sighting at the wrong place
        }
      }
    }
  }
  return true;
}

Fig1 fig1_fixture() {
  Fig1 f;
  f.world = make_world({
      "....@...",
      "@.....@.",
      "......@.",
      ".@@.@...",
      "......@.",
  });
  f.world.set_forbidden({cell(f.world, 2, 2)});
  f.plan = plan_of(f.world, {
      {{0, 1}, {0, 2}, {0, 3}, {1, 3}, {1, 4}, {2, 4}},
      {{4, 0}, {4, 1}, {4, 2}, {4, 3}, {4, 3}, {4, 3}},
      {{1, 7}, {2, 7}, {3, 7}, {3, 6}, {3, 6}, {3, 6}},
  });
  f.announced.t = 1;
  f.announced.horizon = {5, 3, 3};
  return f;
}

Counterexample counterexample_fixture() {
  Counterexample c;
  c.world = open_grid(4, 4);
  c.world.set_forbidden({cell(c.world, 1, 1)});
  c.plan = plan_of(c.world, {
      {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 3}, {0, 3}},
      {{3, 0}, {3, 1}, {3, 2}, {3, 3}, {3, 3}, {3, 3}},
  });
  c.full = full_announcement(c.plan, 0);
  return c;
}

Convoy convoy_fixture() {
  Convoy c;
  c.world = make_world({"......"});
  c.world.set_forbidden({cell(c.world, 0, 3)});
  c.plan = plan_of(c.world, {
      {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 5}},
      {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 4}},
  });
  return c;
}

SmallInstance random_small_instance(Rng& rng) {
  for (;;) {
    const int width = 3 + static_cast<int>(rng.below(2));
    const int height = 3 + static_cast<int>(rng.below(2));
    const int blocks = static_cast<int>(rng.below(4));
    std::vector<int> order(width * height);
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    std::vector<RowCol> blocked;
    for (int b = 0; b < blocks; ++b)
      blocked.push_back({order[b] / width, order[b] % width});
    GridWorld world(width, height, blocked);
    if (world.num_cells() < 6) continue;

    // Largest connected free component.
    std::vector<int> comp(world.num_cells(), -1);
    int best = -1, best_size = 0;
    for (CellId v = 0; v < world.num_cells(); ++v) {
      if (comp[v] >= 0) continue;
      std::vector<CellId> stack{v};
      comp[v] = v;
      int size = 0;
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
        best = v;
      }
    }
    std::vector<CellId> pool;
    for (CellId v = 0; v < world.num_cells(); ++v)
      if (comp[v] == best) pool.push_back(v);
    const int R = 2 + static_cast<int>(rng.below(2));
    if (static_cast<int>(pool.size()) < 2 * R) continue;
    rng.shuffle(pool);

    MapfInstance inst;
    inst.world = &world;
    inst.starts.assign(pool.begin(), pool.begin() + R);
    inst.goals.assign(pool.begin() + R, pool.begin() + 2 * R);
    auto res = plan_ecbs(inst, 1.3, 20000);
    if (res.status != SolveStatus::Ok || res.plan.horizon() > 6 ||
        res.plan.horizon() < 2)
      continue;

    SmallInstance out;
    out.world = std::move(world);
    out.plan = std::move(res.plan);
    out.starts = std::move(inst.starts);
    out.goals = std::move(inst.goals);
    return out;
  }
}

Scenario make_scenario(const GridWorld& w, const MapfPlan& plan,
                       AnnouncementPolicy policy, AttackerConfig attacker,
                       const std::string& id) {
  Scenario sc;
  sc.id = id;
  sc.world = w;
  sc.plan = plan;
  for (RobotId i = 0; i < plan.num_robots(); ++i) {
    sc.starts.push_back(plan.at(i, 0));
    sc.goals.push_back(plan.at(i, plan.horizon()));
  }
  sc.policy = policy;
  sc.attacker = attacker;
  const auto& forb = w.forbidden_cells();
  sc.forbidden = forb.empty() ? -1 : forb.front();
  return sc;
}

int run_cli(const std::string& args, std::string* stdout_text) {
#ifndef HOLA_CLI_PATH
#error "HOLA_CLI_PATH must be defined for CLI tests"
#endif
  const std::string cmd = std::string(HOLA_CLI_PATH) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  if (stdout_text) *stdout_text = std::move(out);
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

}  // namespace test_support
