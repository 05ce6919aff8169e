#include "hola/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <boost/heap/d_ary_heap.hpp>

namespace hola {

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

std::vector<int> bfs_distances(const GridWorld& w, CellId source) {
  std::vector<int> dist(w.num_cells(), kInf);
  std::deque<CellId> queue;
  dist[source] = 0;
  queue.push_back(source);
  while (!queue.empty()) {
    CellId v = queue.front();
    queue.pop_front();
    for (CellId m : w.motion_neighbors(v)) {
      if (dist[m] == kInf) {
        dist[m] = dist[v] + 1;
        queue.push_back(m);
      }
    }
  }
  return dist;
}

inline CellId padded_at(const std::vector<CellId>& path, Timestep t) {
  return t < static_cast<Timestep>(path.size()) ? path[t] : path.back();
}

inline uint64_t pack_pair(uint32_t hi, uint32_t lo) {
  return (static_cast<uint64_t>(hi) << 32) | lo;
}

// ---------------------------------------------------------------- low level

struct LLEntry {
  int f = 0;
  int g = 0;
  int conflicts = 0;
  CellId cell = 0;
  Timestep t = 0;
};

// boost heaps keep the comparator-greatest element on top; both orders are
// inverted so the top is the smallest tuple.
struct LLOpenCmp {
  bool operator()(const LLEntry& a, const LLEntry& b) const {
    return std::tuple(a.f, -a.g, a.cell) > std::tuple(b.f, -b.g, b.cell);
  }
};

using LLOpenHeap =
    boost::heap::d_ary_heap<LLEntry, boost::heap::arity<2>,
                            boost::heap::compare<LLOpenCmp>,
                            boost::heap::mutable_<true>>;

struct LLFocalCmp {
  bool operator()(const LLOpenHeap::handle_type& a,
                  const LLOpenHeap::handle_type& b) const {
    const LLEntry& x = *a;
    const LLEntry& y = *b;
    return std::tuple(x.conflicts, x.f, -x.g, x.cell) >
           std::tuple(y.conflicts, y.f, -y.g, y.cell);
  }
};

using LLFocalHeap =
    boost::heap::d_ary_heap<LLOpenHeap::handle_type, boost::heap::arity<2>,
                            boost::heap::compare<LLFocalCmp>>;

// Occupancy view of the other robots' committed paths, goal-rest padded.
struct AvoidanceTable {
  const std::vector<const std::vector<CellId>*>* paths = nullptr;

  int vertex_conflicts(CellId cell, Timestep t) const {
    int n = 0;
    for (const auto* p : *paths)
      if (!p->empty() && padded_at(*p, t) == cell) ++n;
    return n;
  }
  int edge_conflicts(CellId from, CellId to, Timestep t) const {
    if (from == to) return 0;
    int n = 0;
    for (const auto* p : *paths) {
      if (p->empty()) continue;
      if (padded_at(*p, t) == to && padded_at(*p, t + 1) == from) ++n;
    }
    return n;
  }
};

LowLevelResult low_level_with_dist(
    const GridWorld& w, CellId start, CellId goal, const Constraints& cons,
    double w_subopt, const std::vector<const std::vector<CellId>*>& others,
    const std::vector<int>& dist_to_goal) {
  LowLevelResult res;
  if (dist_to_goal[start] >= kInf) return res;

  Timestep last_goal_constraint = -1;
  for (const auto& [t, v] : cons.vertex)
    if (v == goal) last_goal_constraint = std::max(last_goal_constraint, t);

  Timestep longest_other = 0;
  for (const auto* p : others)
    longest_other =
        std::max<Timestep>(longest_other, static_cast<Timestep>(p->size()));
  const Timestep t_max =
      std::max({dist_to_goal[start], cons.latest() + 1, longest_other}) +
      w.width() + w.height() + 2;

  AvoidanceTable avoid{&others};

  LLOpenHeap open;
  LLFocalHeap focal;
  std::unordered_map<uint64_t, LLOpenHeap::handle_type> in_open;
  std::unordered_set<uint64_t> seen;  // pushed at any point (first wins)
  std::unordered_map<uint64_t, uint64_t> parent;

  auto push = [&](CellId cell, Timestep t, int g, int conflicts) {
    LLEntry e{g + dist_to_goal[cell], g, conflicts, cell, t};
    auto h = open.push(e);
    uint64_t key = pack_pair(t, cell);
    in_open.emplace(key, h);
    seen.insert(key);
    return h;
  };

  auto h0 = push(start, 0, 0, avoid.vertex_conflicts(start, 0));
  int fmin = (*h0).f;
  double focal_bound = w_subopt * fmin + 1e-9;
  focal.push(h0);

  while (!open.empty()) {
    int cur_min = open.top().f;
    if (cur_min > fmin) {
      // The bound moved: admit every open state that now qualifies. Ordered
      // iteration starts at the minimum f, so we can stop at the bound.
      double new_bound = w_subopt * cur_min + 1e-9;
      for (auto it = open.ordered_begin(); it != open.ordered_end(); ++it) {
        if (it->f > new_bound) break;
        if (it->f > focal_bound)
          focal.push(in_open.at(pack_pair(it->t, it->cell)));
      }
      fmin = cur_min;
      focal_bound = new_bound;
    }

    LLOpenHeap::handle_type handle;
    if (!focal.empty()) {
      handle = focal.top();
      focal.pop();
    } else {
      handle = in_open.at(pack_pair(open.top().t, open.top().cell));
    }
    LLEntry e = *handle;
    open.erase(handle);
    in_open.erase(pack_pair(e.t, e.cell));
    ++res.expanded;

    if (e.cell == goal && e.t > last_goal_constraint) {
      res.found = true;
      res.cost = e.g;
      res.fmin = fmin;
      std::vector<CellId> rev;
      uint64_t k = pack_pair(e.t, e.cell);
      while (true) {
        rev.push_back(static_cast<CellId>(k & 0xffffffffu));
        auto it = parent.find(k);
        if (it == parent.end()) break;
        k = it->second;
      }
      res.path.assign(rev.rbegin(), rev.rend());
      return res;
    }
    if (e.t >= t_max) continue;

    for (CellId next : w.motion_neighbors(e.cell)) {
      Timestep nt = e.t + 1;
      uint64_t key = pack_pair(nt, next);
      if (seen.count(key)) continue;
      if (cons.blocks_vertex(nt, next)) continue;
      if (cons.blocks_edge(e.t, e.cell, next)) continue;
      int conf = e.conflicts + avoid.vertex_conflicts(next, nt) +
                 avoid.edge_conflicts(e.cell, next, e.t);
      auto h = push(next, nt, e.g + 1, conf);
      parent[key] = pack_pair(e.t, e.cell);
      if ((*h).f <= focal_bound) focal.push(h);
    }
  }
  return res;  // exhausted the bounded space-time graph
}

// --------------------------------------------------------------- high level

struct HLConstraint {
  RobotId robot = -1;
  bool is_edge = false;
  Timestep t = 0;
  CellId v = 0;     // vertex cell, or edge destination
  CellId from = 0;  // edge origin
};

struct HLNode {
  int parent = -1;
  HLConstraint added;
  std::vector<std::shared_ptr<const std::vector<CellId>>> paths;
  std::vector<int> costs;
  std::vector<int> fmins;
  int cost = 0;
  int lb = 0;
  int conflicts = 0;
};

struct HLKey {
  int lb = 0;
  int cost = 0;
  int conflicts = 0;
  int id = 0;
};

struct HLOpenCmp {
  bool operator()(const HLKey& a, const HLKey& b) const {
    return std::tuple(a.lb, a.cost, a.id) > std::tuple(b.lb, b.cost, b.id);
  }
};
using HLOpenHeap =
    boost::heap::d_ary_heap<HLKey, boost::heap::arity<2>,
                            boost::heap::compare<HLOpenCmp>,
                            boost::heap::mutable_<true>>;
struct HLFocalCmp {
  bool operator()(const HLOpenHeap::handle_type& a,
                  const HLOpenHeap::handle_type& b) const {
    const HLKey& x = *a;
    const HLKey& y = *b;
    return std::tuple(x.conflicts, x.cost, x.id) >
           std::tuple(y.conflicts, y.cost, y.id);
  }
};
using HLFocalHeap =
    boost::heap::d_ary_heap<HLOpenHeap::handle_type, boost::heap::arity<2>,
                            boost::heap::compare<HLFocalCmp>>;

struct FoundConflict {
  bool any = false;
  bool is_edge = false;
  Timestep t = 0;
  RobotId i = 0, j = 0;
  // vertex: both robots on cell u at t; edge: i moves u->v while j moves
  // v->u between t and t+1.
  CellId u = 0, v = 0;
};

Timestep padded_horizon(const HLNode& n) {
  size_t len = 1;
  for (const auto& p : n.paths) len = std::max(len, p->size());
  return static_cast<Timestep>(len) - 1;
}

// Earliest conflict, vertex before edge at equal time; robots scanned in id
// order so the choice is deterministic.
FoundConflict first_conflict(const HLNode& n) {
  FoundConflict c;
  const int R = static_cast<int>(n.paths.size());
  const Timestep T = padded_horizon(n);
  std::unordered_map<CellId, RobotId> occupant;
  std::unordered_map<uint64_t, RobotId> movers;
  for (Timestep t = 0; t <= T; ++t) {
    occupant.clear();
    for (RobotId i = 0; i < R; ++i) {
      CellId v = padded_at(*n.paths[i], t);
      auto [it, fresh] = occupant.emplace(v, i);
      if (!fresh) {
        c.any = true;
        c.t = t;
        c.i = it->second;
        c.j = i;
        c.u = v;
        return c;
      }
    }
    if (t == T) break;
    movers.clear();
    for (RobotId i = 0; i < R; ++i) {
      CellId a = padded_at(*n.paths[i], t);
      CellId b = padded_at(*n.paths[i], t + 1);
      if (a == b) continue;
      auto it = movers.find(pack_pair(b, a));
      if (it != movers.end()) {
        c.any = true;
        c.is_edge = true;
        c.t = t;
        c.i = it->second;  // earlier robot moves b->a
        c.j = i;           // current robot moves a->b
        c.u = b;
        c.v = a;
        return c;
      }
      movers.emplace(pack_pair(a, b), i);
    }
  }
  return c;
}

int count_conflicts(const HLNode& n) {
  const int R = static_cast<int>(n.paths.size());
  const Timestep T = padded_horizon(n);
  int total = 0;
  std::unordered_map<CellId, int> occ;
  std::unordered_map<uint64_t, int> movers;
  for (Timestep t = 0; t <= T; ++t) {
    occ.clear();
    for (RobotId i = 0; i < R; ++i) total += occ[padded_at(*n.paths[i], t)]++;
    if (t == T) break;
    movers.clear();
    for (RobotId i = 0; i < R; ++i) {
      CellId a = padded_at(*n.paths[i], t);
      CellId b = padded_at(*n.paths[i], t + 1);
      if (a == b) continue;
      auto it = movers.find(pack_pair(b, a));
      if (it != movers.end()) total += it->second;
      movers[pack_pair(a, b)]++;
    }
  }
  return total;
}

Constraints collect_constraints(const std::vector<HLNode>& nodes, int node,
                                RobotId robot) {
  Constraints out;
  for (int cur = node; cur >= 0; cur = nodes[cur].parent) {
    const HLConstraint& a = nodes[cur].added;
    if (a.robot != robot) continue;
    if (a.is_edge)
      out.edge.insert({a.t, a.from, a.v});
    else
      out.vertex.insert({a.t, a.v});
  }
  return out;
}

}  // namespace

Timestep Constraints::latest() const {
  Timestep m = -1;
  for (const auto& [t, v] : vertex) m = std::max(m, t);
  for (const auto& [t, f, g] : edge) m = std::max(m, t + 1);
  return m;
}

LowLevelResult low_level_focal_search(
    const GridWorld& w, CellId start, CellId goal, const Constraints& cons,
    double w_subopt,
    const std::vector<const std::vector<CellId>*>& other_paths) {
  return low_level_with_dist(w, start, goal, cons, w_subopt, other_paths,
                             bfs_distances(w, goal));
}

SolveResult plan_ecbs(const MapfInstance& inst, double w_subopt,
                      int node_budget) {
  if (w_subopt < 1.0)
    throw std::invalid_argument("suboptimality factor must be >= 1");
  const GridWorld& w = *inst.world;
  const int R = inst.num_robots();
  if (R == 0 || inst.goals.size() != inst.starts.size())
    throw std::invalid_argument("instance needs matching starts and goals");

  SolveResult res;
  std::vector<std::vector<int>> dist(R);
  for (RobotId i = 0; i < R; ++i) {
    dist[i] = bfs_distances(w, inst.goals[i]);
    if (dist[i][inst.starts[i]] >= kInf) return res;  // Unsolvable
  }

  std::vector<HLNode> nodes;
  nodes.reserve(256);

  auto replan = [&](int tree_index, RobotId i) -> bool {
    HLNode& n = nodes[tree_index];
    Constraints cons = collect_constraints(nodes, tree_index, i);
    std::vector<const std::vector<CellId>*> others;
    others.reserve(R - 1);
    for (RobotId j = 0; j < R; ++j)
      if (j != i && n.paths[j]) others.push_back(n.paths[j].get());
    LowLevelResult ll = low_level_with_dist(
        w, inst.starts[i], inst.goals[i], cons, w_subopt, others, dist[i]);
    res.stats.low_level_expanded += ll.expanded;
    if (!ll.found) return false;
    n.paths[i] =
        std::make_shared<const std::vector<CellId>>(std::move(ll.path));
    n.costs[i] = ll.cost;
    n.fmins[i] = ll.fmin;
    return true;
  };

  // Root: plan robots in id order, each biased away from the paths already
  // chosen (focal tie-breaking only; the per-robot bound is unaffected).
  {
    HLNode root;
    root.paths.assign(R, nullptr);
    root.costs.assign(R, 0);
    root.fmins.assign(R, 0);
    nodes.push_back(std::move(root));
  }
  for (RobotId i = 0; i < R; ++i)
    if (!replan(0, i)) return res;  // unreachable: solvability checked above
  for (RobotId i = 0; i < R; ++i) {
    nodes[0].cost += nodes[0].costs[i];
    nodes[0].lb += nodes[0].fmins[i];
  }
  nodes[0].conflicts = count_conflicts(nodes[0]);

  HLOpenHeap open;
  HLFocalHeap focal;
  std::unordered_map<int, HLOpenHeap::handle_type> in_open;

  auto push_node = [&](int id) {
    const HLNode& n = nodes[id];
    auto h = open.push({n.lb, n.cost, n.conflicts, id});
    in_open.emplace(id, h);
    return h;
  };

  int lb_min = nodes[0].lb;
  double focal_bound = w_subopt * lb_min + 1e-9;
  focal.push(push_node(0));

  while (!open.empty()) {
    int cur_lb = open.top().lb;
    if (cur_lb > lb_min) {
      double new_bound = w_subopt * cur_lb + 1e-9;
      // Focal membership depends on cost, which is not monotone in the
      // (lb-ordered) iteration, so scan the whole open list.
      for (auto it = open.ordered_begin(); it != open.ordered_end(); ++it)
        if (it->cost <= new_bound && it->cost > focal_bound)
          focal.push(in_open.at(it->id));
      lb_min = cur_lb;
      focal_bound = new_bound;
    }
    // Focal can be empty when every qualifying node was already expanded;
    // the open minimum always qualifies after a bound update, but guard
    // anyway and fall back to it.
    HLOpenHeap::handle_type handle;
    if (!focal.empty()) {
      handle = focal.top();
      focal.pop();
    } else {
      handle = in_open.at(open.top().id);
    }
    HLKey key = *handle;
    open.erase(handle);
    in_open.erase(key.id);

    FoundConflict c = first_conflict(nodes[key.id]);
    if (!c.any) {
      res.status = SolveStatus::Ok;
      res.stats.cost = nodes[key.id].cost;
      res.stats.lower_bound = lb_min;
      size_t len = 1;
      for (const auto& p : nodes[key.id].paths)
        len = std::max(len, p->size());
      res.plan.paths.assign(R, {});
      for (RobotId i = 0; i < R; ++i) {
        res.plan.paths[i] = *nodes[key.id].paths[i];
        res.plan.paths[i].resize(len, nodes[key.id].paths[i]->back());
      }
      return res;
    }

    if (++res.stats.high_level_expanded > node_budget) {
      res.status = SolveStatus::BudgetExceeded;
      return res;
    }

    for (int side = 0; side < 2; ++side) {
      RobotId r = side == 0 ? c.i : c.j;
      HLNode child;
      child.parent = key.id;
      child.paths = nodes[key.id].paths;
      child.costs = nodes[key.id].costs;
      child.fmins = nodes[key.id].fmins;
      child.added.robot = r;
      child.added.t = c.t;
      if (c.is_edge) {
        child.added.is_edge = true;
        if (side == 0) {  // robot i took u->v
          child.added.from = c.u;
          child.added.v = c.v;
        } else {  // robot j took v->u
          child.added.from = c.v;
          child.added.v = c.u;
        }
      } else {
        child.added.v = c.u;
      }
      int id = static_cast<int>(nodes.size());
      nodes.push_back(std::move(child));
      if (!replan(id, r)) {
        nodes.pop_back();
        continue;
      }
      HLNode& cn = nodes[id];
      cn.cost = 0;
      cn.lb = 0;
      for (RobotId i = 0; i < R; ++i) {
        cn.cost += cn.costs[i];
        cn.lb += cn.fmins[i];
      }
      cn.conflicts = count_conflicts(cn);
      auto h = push_node(id);
      if (cn.cost <= focal_bound) focal.push(h);
    }
  }
  return res;  // tree exhausted: no conflict-free assignment exists
}

}  // namespace hola
