#include "hola/oracle.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace hola {

namespace {

constexpr int kCellBits = 12;  // dense ids fit: worlds here stay <= 4096 cells
constexpr int kMaxRobots = 5;  // 5 * 12 bits pack into one uint64

inline uint64_t pack_config(const std::vector<CellId>& cells) {
  uint64_t key = 0;
  for (size_t i = 0; i < cells.size(); ++i)
    key |= static_cast<uint64_t>(cells[i]) << (kCellBits * i);
  return key;
}

inline void unpack_config(uint64_t key, int robots,
                          std::vector<CellId>& cells) {
  cells.resize(robots);
  for (int i = 0; i < robots; ++i)
    cells[i] = static_cast<CellId>((key >> (kCellBits * i)) & 0xfff);
}

inline uint32_t pack_move(CellId from, CellId to) {
  return (static_cast<uint32_t>(from) << kCellBits) |
         static_cast<uint32_t>(to);
}

// Exact per-step model of what honest robots can observe.  Honest robots
// follow their announced prefixes and may move anywhere conflict-free
// afterwards; the attacker is assumed on its announced path.  A config only
// counts if it extends to the end of the announcement window (a cornered
// prefix is not a real continuation).
struct StepModel {
  // honest_moves[d]: single-robot moves (excluding the attacker) realized by
  // some viable transition between times s+d and s+d+1.
  std::vector<std::unordered_set<uint32_t>> honest_moves;
  // safe[d]: cells where the attacker provably triggers no report mismatch
  // at time s+d under every viable continuation.
  std::vector<CellSet> safe;
  long long states = 0;
  bool over_budget = false;
};

class Enumerator {
 public:
  Enumerator(const GridWorld& w, const MapfPlan& plan, const Announcement& ann,
             RobotId attacker, long long budget)
      : w_(w), plan_(plan), ann_(ann), attacker_(attacker), budget_(budget),
        R_(plan.num_robots()) {}

  // Builds the model for times s..s+span, where span covers the attacker's
  // window; viability is checked through the longest announced horizon.
  bool run(StepModel& out, Timestep s, Timestep span_end, Timestep viab_end) {
    s_ = s;
    const int L = viab_end - s;
    const int span = span_end - s;
    layers_.assign(L + 1, {});
    std::vector<CellId> start(R_);
    for (RobotId i = 0; i < R_; ++i) start[i] = plan_.at(i, s);
    layers_[0].insert(pack_config(start));
    out.states = 1;

    // Pass 1: forward reachability (budget-checked).
    std::vector<CellId> cur, next(R_);
    for (int d = 0; d < L; ++d) {
      for (uint64_t key : layers_[d]) {
        unpack_config(key, R_, cur);
        bool ok = expand(cur, next, d, 0, [&](uint64_t succ) {
          if (++out.states > budget_) return false;
          layers_[d + 1].insert(succ);
          return true;
        });
        if (!ok) {
          out.over_budget = true;
          return false;
        }
      }
    }

    // Pass 2: backward viability pruning.  The final layer always extends
    // (every robot is past its horizon there, so all-wait is legal).
    for (int d = L - 1; d >= 0; --d) {
      std::unordered_set<uint64_t> kept;
      for (uint64_t key : layers_[d]) {
        unpack_config(key, R_, cur);
        bool found = false;
        expand(cur, next, d, 0, [&](uint64_t succ) {
          if (layers_[d + 1].count(succ)) {
            found = true;
            return false;  // stop enumerating
          }
          return true;
        });
        if (found) kept.insert(key);
      }
      layers_[d] = std::move(kept);
    }

    // Pass 3: moves and safe cells over viable transitions only.
    out.honest_moves.assign(std::max(0, span), {});
    build_safe(out, span);
    for (int d = 0; d < span; ++d) {
      for (uint64_t key : layers_[d]) {
        unpack_config(key, R_, cur);
        expand(cur, next, d, 0, [&](uint64_t succ) {
          if (layers_[d + 1].count(succ)) {
            for (RobotId j = 0; j < R_; ++j)
              if (j != attacker_)
                out.honest_moves[d].insert(pack_move(cur[j], next[j]));
          }
          return true;
        });
      }
    }
    return true;
  }

 private:
  // Enumerates conflict-free joint successors of `cur` at depth d (robots
  // within their horizon are forced onto the announced plan).  Calls `sink`
  // for each complete successor; stops early if sink returns false.
  template <class Sink>
  bool expand(const std::vector<CellId>& cur, std::vector<CellId>& next,
              int d, RobotId i, Sink&& sink) {
    if (i == R_) return sink(pack_config(next));
    const Timestep u = s_ + d;
    auto try_cell = [&](CellId c) {
      for (RobotId j = 0; j < i; ++j) {
        if (next[j] == c) return true;                      // vertex conflict
        if (c == cur[j] && next[j] == cur[i]) return true;  // swap conflict
      }
      next[i] = c;
      return expand(cur, next, d, i + 1, sink);
    };
    if (ann_.horizon[i] >= u + 1) return try_cell(plan_.at(i, u + 1));
    for (CellId c : w_.motion_neighbors(cur[i]))
      if (!try_cell(c)) return false;
    return true;
  }

  void build_safe(StepModel& out, int span) {
    CellSet full = w_.empty_set();
    for (CellId v = 0; v < w_.num_cells(); ++v) full.set(v);
    out.safe.assign(span + 1, full);
    std::vector<CellId> cur;
    for (int d = 1; d <= span; ++d) {
      CellSet acc = full;
      for (uint64_t key : layers_[d]) {
        unpack_config(key, R_, cur);
        const CellId ca = cur[attacker_];
        bool scheduled = false;
        CellSet sensed = w_.empty_set();
        for (RobotId j = 0; j < R_; ++j) {
          if (j == attacker_) continue;
          if (w_.adjacent(ca, cur[j]))
            scheduled = true;  // co-observation due: only the exact announced
                               // cell avoids a mismatch
          else
            sensed |= w_.neighbor_mask(cur[j]);
        }
        if (scheduled) {
          CellSet only = w_.empty_set();
          only.set(ca);
          acc &= only;
        } else {
          acc -= sensed;
        }
      }
      out.safe[d] = acc;
    }
  }

  const GridWorld& w_;
  const MapfPlan& plan_;
  const Announcement& ann_;
  RobotId attacker_;
  long long budget_;
  int R_;
  Timestep s_ = 0;
  std::vector<std::unordered_set<uint64_t>> layers_;
};

// Depth-first search for an attacker walk that diverges immediately after s,
// stays mismatch-free under every viable continuation, visits a forbidden
// cell strictly inside the window, and steps back onto its announced path.
class DeviationSearch {
 public:
  DeviationSearch(const GridWorld& w, const MapfPlan& plan,
                  const Announcement& ann, RobotId attacker,
                  const StepModel& m)
      : w_(w), plan_(plan), attacker_(attacker), m_(m), s_(ann.t),
        last_(ann.horizon[attacker]) {
    memo_.assign((last_ - s_ + 1) * w.num_cells() * 2, 0);
  }

  std::optional<Deviation> run() {
    if (last_ < s_ + 2) return std::nullopt;
    path_.clear();
    if (dfs(s_, plan_.at(attacker_, s_), false)) {
      Deviation dev;
      dev.robot = attacker_;
      dev.window_start = s_;
      dev.window_end = s_ + static_cast<Timestep>(path_.size());
      dev.interior.assign(path_.begin(), path_.end() - 1);
      return dev;
    }
    return std::nullopt;
  }

 private:
  uint8_t& memo(Timestep u, CellId v, bool vis) {
    return memo_[((u - s_) * w_.num_cells() + v) * 2 + (vis ? 1 : 0)];
  }

  // On success, path_ holds the positions s+1..f (front-inserted on unwind).
  bool dfs(Timestep u, CellId cell, bool visited) {
    if (u >= last_) return false;
    if (memo(u, cell, visited)) return false;
    const int d1 = u + 1 - s_;
    const CellId nominal = plan_.at(attacker_, u + 1);
    for (CellId c : w_.motion_neighbors(cell)) {
      if (m_.honest_moves[u - s_].count(pack_move(c, cell)))
        continue;  // would swap with a possible honest move
      if (c == nominal) {
        if (u + 1 == s_ + 1) continue;  // must diverge immediately
        if (visited) {
          path_.push_back(c);  // rejoin: c closes the window
          return true;
        }
        if (dfs(u + 1, c, w_.forbidden().test(c))) {
          path_.insert(path_.begin(), c);
          return true;
        }
        continue;
      }
      if (!m_.safe[d1].test(c)) continue;
      if (dfs(u + 1, c, visited || w_.forbidden().test(c))) {
        path_.insert(path_.begin(), c);
        return true;
      }
    }
    memo(u, cell, visited) = 1;
    return false;
  }

  const GridWorld& w_;
  const MapfPlan& plan_;
  RobotId attacker_;
  const StepModel& m_;
  Timestep s_, last_;
  std::vector<uint8_t> memo_;
  std::vector<CellId> path_;
};

}  // namespace

OracleResult oracle_check(const GridWorld& w, const MapfPlan& plan,
                          const Announcement& ann, RobotId attacker,
                          long long budget) {
  const int R = plan.num_robots();
  if (R == 0) throw std::invalid_argument("oracle: plan has no robots");
  if (attacker < 0 || attacker >= R)
    throw std::invalid_argument("oracle: unknown attacker id");
  if (static_cast<int>(ann.horizon.size()) != R)
    throw std::invalid_argument(
        "oracle: announcement robot count does not match plan");

  OracleResult res;
  if (R > kMaxRobots) return res;  // Infeasible: beyond the enumeration regime

  const Timestep s = ann.t;
  const Timestep span_end = ann.horizon[attacker];
  const Timestep viab_end =
      *std::max_element(ann.horizon.begin(), ann.horizon.end());

  StepModel model;
  Enumerator en(w, plan, ann, attacker, budget);
  if (!en.run(model, s, std::max(s, span_end), std::max(s, viab_end))) {
    res.states_explored = model.states;
    return res;  // Infeasible (budget exhausted)
  }
  res.states_explored = model.states;

  DeviationSearch search(w, plan, ann, attacker, model);
  res.deviation = search.run();
  res.status =
      res.deviation ? OracleStatus::Counterexample : OracleStatus::Secure;
  return res;
}

}  // namespace hola
