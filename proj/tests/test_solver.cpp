#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"

using namespace hola;
using namespace test_support;

namespace {

// Sum of final arrival times recomputed from the padded plan.
long long plan_cost(const MapfInstance& inst, const MapfPlan& plan) {
  long long total = 0;
  for (RobotId i = 0; i < plan.num_robots(); ++i) {
    int arrival = 0;
    for (int t = plan.horizon(); t >= 0; --t) {
      if (plan.at(i, t) != inst.goals[i]) {
        arrival = t + 1;
        break;
      }
    }
    total += arrival;
  }
  return total;
}

}  // namespace

TEST_CASE("single robot on a free line walks straight") {
  GridWorld w = open_grid(5, 1);
  MapfInstance inst{&w, {cell(w, 0, 0)}, {cell(w, 0, 4)}};
  auto res = plan_ecbs(inst);
  REQUIRE(res.status == SolveStatus::Ok);
  CHECK(res.stats.cost == 4);
  CHECK(res.stats.lower_bound == 4);
  CHECK(res.plan.horizon() == 4);
  CHECK_FALSE(validate_plan(w, res.plan).has_value());
  CHECK(res.plan.at(0, 0) == inst.starts[0]);
  CHECK(res.plan.at(0, 4) == inst.goals[0]);
}

TEST_CASE("robot starting on its goal costs nothing") {
  GridWorld w = open_grid(3, 3);
  MapfInstance inst{&w, {cell(w, 1, 1)}, {cell(w, 1, 1)}};
  auto res = plan_ecbs(inst);
  REQUIRE(res.status == SolveStatus::Ok);
  CHECK(res.stats.cost == 0);
  CHECK(res.plan.num_robots() == 1);
}

TEST_CASE("swap on a bare corridor exhausts the node budget") {
  // Two robots must trade ends of a dead-straight corridor with no lay-by.
  // No schedule exists, and the constraint tree grows without bound, so the
  // solver stops at its node budget rather than claiming unsolvability.
  GridWorld w = open_grid(3, 1);
  MapfInstance inst{&w,
                    {cell(w, 0, 0), cell(w, 0, 2)},
                    {cell(w, 0, 2), cell(w, 0, 0)}};
  auto res = plan_ecbs(inst, 1.3, 2000);
  CHECK(res.status == SolveStatus::BudgetExceeded);
}

TEST_CASE("disconnected goal is unsolvable") {
  GridWorld w = make_world({".@."});
  MapfInstance inst{&w, {cell(w, 0, 0)}, {cell(w, 0, 2)}};
  CHECK(plan_ecbs(inst).status == SolveStatus::Unsolvable);
}

TEST_CASE("corridor convoy moves in lockstep") {
  GridWorld w = open_grid(5, 1);
  MapfInstance inst{&w,
                    {cell(w, 0, 0), cell(w, 0, 1)},
                    {cell(w, 0, 3), cell(w, 0, 4)}};
  auto res = plan_ecbs(inst);
  REQUIRE(res.status == SolveStatus::Ok);
  CHECK_FALSE(validate_plan(w, res.plan).has_value());
  CHECK(res.stats.cost == 6);
  CHECK(plan_cost(inst, res.plan) == 6);
}

TEST_CASE("head-on meeting resolves through a passing bay") {
  GridWorld w = make_world({"...", "@.@"});
  // Row 0 is the corridor; (1,1) is the lay-by one robot ducks into.
  MapfInstance inst{&w,
                    {cell(w, 0, 0), cell(w, 0, 2)},
                    {cell(w, 0, 2), cell(w, 0, 0)}};
  auto res = plan_ecbs(inst);
  REQUIRE(res.status == SolveStatus::Ok);
  CHECK_FALSE(validate_plan(w, res.plan).has_value());
  long long optimal = joint_optimal_cost(inst);
  REQUIRE(optimal > 0);
  CHECK(res.stats.lower_bound <= optimal);
  CHECK(res.stats.cost <= 1.3 * static_cast<double>(optimal) + 1e-9);
}

TEST_CASE("tiny node budget reports budget exhaustion, not failure") {
  GridWorld w = make_world({"...", "@.@"});
  MapfInstance inst{&w,
                    {cell(w, 0, 0), cell(w, 0, 2)},
                    {cell(w, 0, 2), cell(w, 0, 0)}};
  auto res = plan_ecbs(inst, 1.3, 1);
  CHECK(res.status == SolveStatus::BudgetExceeded);
}

TEST_CASE("solver output is deterministic") {
  GridWorld w = open_grid(4, 4);
  MapfInstance inst{&w,
                    {cell(w, 0, 0), cell(w, 3, 3), cell(w, 0, 3)},
                    {cell(w, 3, 3), cell(w, 0, 0), cell(w, 3, 0)}};
  auto a = plan_ecbs(inst);
  auto b = plan_ecbs(inst);
  REQUIRE(a.status == SolveStatus::Ok);
  REQUIRE(b.status == SolveStatus::Ok);
  CHECK(a.plan.paths == b.plan.paths);
  CHECK(a.stats.cost == b.stats.cost);
}

TEST_CASE("plans stay within the suboptimality bound on random micros") {
  Rng rng(7);
  int checked = 0;
  while (checked < 25) {
    SmallInstance si = random_small_instance(rng);
    MapfInstance inst{&si.world, si.starts, si.goals};
    auto res = plan_ecbs(inst);
    REQUIRE(res.status == SolveStatus::Ok);
    CHECK_FALSE(validate_plan(si.world, res.plan).has_value());
    long long optimal = joint_optimal_cost(inst);
    REQUIRE(optimal >= 0);
    CHECK(res.stats.lower_bound <= optimal);
    CHECK(res.stats.cost <= 1.3 * static_cast<double>(optimal) + 1e-9);
    CHECK(plan_cost(inst, res.plan) == res.stats.cost);
    ++checked;
  }
}

TEST_CASE("paths are padded with goal rest to a uniform length") {
  GridWorld w = open_grid(5, 1);
  MapfInstance inst{&w,
                    {cell(w, 0, 0), cell(w, 0, 3)},
                    {cell(w, 0, 2), cell(w, 0, 4)}};
  auto res = plan_ecbs(inst);
  REQUIRE(res.status == SolveStatus::Ok);
  REQUIRE(res.plan.num_robots() == 2);
  const size_t len = res.plan.paths[0].size();
  CHECK(res.plan.paths[1].size() == len);
  // Robot 1 arrives first and rests on its goal.
  CHECK(res.plan.at(1, res.plan.horizon()) == inst.goals[1]);
  CHECK(res.plan.at(0, res.plan.horizon()) == inst.goals[0]);
}
