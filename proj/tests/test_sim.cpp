#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "test_support.hpp"
#include "hola/oracle.hpp"
#include "hola/sim.hpp"

using namespace hola;
using namespace test_support;

TEST_CASE("no attacker: the run is the plan, nothing fires") {
  Counterexample c = counterexample_fixture();
  Scenario sc = make_scenario(c.world, c.plan, {PolicyKind::Full},
                            {-1, AttackerKind::None});
  MetricsRecord rec = run_simulation(sc);
  CHECK(rec.scenario_id == "test");
  CHECK(rec.robots == 2);
  CHECK(rec.policy_p == 0);
  CHECK(rec.policy_k == 0);
  CHECK(rec.attacker_kind == AttackerKind::None);
  CHECK_FALSE(rec.attack_success);
  CHECK_FALSE(rec.detection_missed);
  CHECK_FALSE(rec.first_detection_t.has_value());
  CHECK_FALSE(rec.secure_verdict.has_value());
}

TEST_CASE("stealthy attacker turns the full release into a silent attack") {
  Counterexample c = counterexample_fixture();
  Scenario sc = make_scenario(c.world, c.plan, {PolicyKind::Full},
                            {c.attacker, AttackerKind::Stealthy});
  MetricsRecord rec = run_simulation(sc);
  CHECK(rec.attack_success);
  CHECK(rec.detection_missed);
  CHECK_FALSE(rec.first_detection_t.has_value());
  REQUIRE(rec.secure_verdict.has_value());
  CHECK_FALSE(*rec.secure_verdict);  // full release fails verification
  CHECK(rec.max_inter_obs == 5);     // the robots never meet
}

TEST_CASE("stealthy attacker abstains under one-step releases") {
  Counterexample c = counterexample_fixture();
  AnnouncementPolicy pol{PolicyKind::Pk, 1, 1, 10};
  Scenario sc = make_scenario(c.world, c.plan, pol,
                            {c.attacker, AttackerKind::Stealthy});
  MetricsRecord rec = run_simulation(sc);
  // The attacker finds no surely-undetected deviation and sits tight, even
  // though the verifier conservatively refuses one cell of this schedule.
  CHECK_FALSE(rec.attack_success);
  CHECK_FALSE(rec.first_detection_t.has_value());
  REQUIRE(rec.secure_verdict.has_value());
  CHECK_FALSE(*rec.secure_verdict);
  CHECK(rec.policy_p == 1);
  CHECK(rec.policy_k == 1);
}

TEST_CASE("bold attacker raids an unobserved forbidden cell unseen") {
  GridWorld w = open_grid(3, 3);
  w.set_forbidden({cell(w, 0, 2)});
  MapfPlan plan = plan_of(w, {{{0, 0}, {0, 0}, {0, 0}, {0, 0}}});
  Scenario sc =
      make_scenario(w, plan, {PolicyKind::Full}, {0, AttackerKind::Bold});
  MetricsRecord rec = run_simulation(sc);
  CHECK(rec.attack_success);
  CHECK(rec.detection_missed);  // nobody is there to see it
  CHECK_FALSE(rec.first_detection_t.has_value());
  CHECK_FALSE(rec.secure_verdict.has_value());
}

TEST_CASE("synthesized releases stay verified on the convoy") {
  Convoy c = convoy_fixture();
  AnnouncementPolicy pol{PolicyKind::Synth, 1, 1, 3};
  Scenario sc = make_scenario(c.world, c.plan, pol, {-1, AttackerKind::None});
  MetricsRecord rec = run_simulation(sc);
  CHECK_FALSE(rec.attack_success);
  REQUIRE(rec.secure_verdict.has_value());
  CHECK(*rec.secure_verdict);
  CHECK(rec.policy_p == 0);
  CHECK(rec.policy_k == 3);  // the synthesis ceiling is recorded
}

TEST_CASE("simulation runs are deterministic") {
  Counterexample c = counterexample_fixture();
  Scenario sc = make_scenario(c.world, c.plan, {PolicyKind::Full},
                            {c.attacker, AttackerKind::Stealthy});
  MetricsRecord a = run_simulation(sc);
  MetricsRecord b = run_simulation(sc);
  CHECK(a.attack_success == b.attack_success);
  CHECK(a.detection_missed == b.detection_missed);
  CHECK(a.first_detection_t == b.first_detection_t);
  CHECK(a.max_inter_obs == b.max_inter_obs);
  CHECK(a.secure_verdict == b.secure_verdict);
}

TEST_CASE("inter-observation gaps count run-in, meetings, and tail") {
  Convoy conv = convoy_fixture();
  CHECK(max_inter_observation(conv.world, conv.plan, 0) == 1);
  CHECK(max_inter_observation(conv.world, conv.plan, 1) == 1);

  Counterexample c = counterexample_fixture();
  CHECK(max_inter_observation(c.world, c.plan, 0) == 5);

  GridWorld line = open_grid(5, 1);
  MapfPlan once = plan_of(line, {
      {{0, 1}, {0, 2}, {0, 3}, {0, 2}, {0, 1}},
      {{0, 4}, {0, 4}, {0, 4}, {0, 4}, {0, 4}},
  });
  // Adjacent only at t=2: gaps are 2 (run-in) and 2 (tail).
  CHECK(max_inter_observation(line, once, 0) == 2);
  CHECK(max_inter_observation(line, once, 1) == 2);
}

TEST_CASE("scenario generation is deterministic and well-formed") {
  GenerateParams params;
  params.size = 12;
  params.robots = 3;
  params.obstacles = 20;
  params.count = 3;
  params.seed = 99;
  params.policy = {PolicyKind::Pk, 1, 2, 10};
  params.attacker_kind = AttackerKind::Stealthy;

  auto a = generate_scenarios(params);
  auto b = generate_scenarios(params);
  REQUIRE(a.size() == 3);
  REQUIRE(b.size() == 3);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].seed == b[i].seed);
    CHECK(a[i].world.to_map_text() == b[i].world.to_map_text());
    CHECK(a[i].starts == b[i].starts);
    CHECK(a[i].goals == b[i].goals);
    CHECK(a[i].plan.paths == b[i].plan.paths);
    CHECK(a[i].forbidden == b[i].forbidden);
    CHECK(a[i].attacker.robot == b[i].attacker.robot);
    CHECK(a[i].attacker_candidates == b[i].attacker_candidates);
    CHECK(a[i].forbidden_candidates == b[i].forbidden_candidates);
  }
  CHECK(a[0].id == "0000");
  CHECK(a[1].id == "0001");
  CHECK(a[2].id == "0002");

  for (const auto& sc : a) {
    // Exact obstacle count.
    CHECK(sc.world.num_cells() == 12 * 12 - 20);
    // Distinct endpoints.
    std::vector<CellId> all = sc.starts;
    all.insert(all.end(), sc.goals.begin(), sc.goals.end());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    // Candidate lists drive the draws.
    CHECK(sc.attacker_candidates.size() <= 10);
    CHECK_FALSE(sc.attacker_candidates.empty());
    CHECK(sc.forbidden_candidates.size() <= 10);
    CHECK_FALSE(sc.forbidden_candidates.empty());
    CHECK(std::count(sc.attacker_candidates.begin(),
                     sc.attacker_candidates.end(),
                     sc.attacker.robot) == 1);
    CHECK(std::count(sc.forbidden_candidates.begin(),
                     sc.forbidden_candidates.end(), sc.forbidden) == 1);
    CHECK(sc.world.forbidden_cells() == std::vector<CellId>{sc.forbidden});
    // The forbidden cell is off every planned path.
    for (const auto& path : sc.plan.paths)
      CHECK(std::count(path.begin(), path.end(), sc.forbidden) == 0);
    // The plan really solves the generated instance.
    CHECK_FALSE(validate_plan(sc.world, sc.plan).has_value());
    for (RobotId i = 0; i < sc.plan.num_robots(); ++i) {
      CHECK(sc.plan.at(i, 0) == sc.starts[i]);
      CHECK(sc.plan.at(i, sc.plan.horizon()) == sc.goals[i]);
    }
  }
}

TEST_CASE("scenario generation fails loudly when robots cannot fit") {
  GenerateParams params;
  params.size = 3;
  params.robots = 10;
  params.obstacles = 0;
  params.count = 1;
  params.max_attempts = 3;
  CHECK_THROWS_AS(generate_scenarios(params), std::runtime_error);
}

TEST_CASE("metric aggregation computes the documented rates") {
  std::vector<MetricsRecord> recs(10);
  for (int i = 0; i < 10; ++i) {
    recs[i].scenario_id = "r" + std::to_string(i);
    recs[i].robots = 5;
    recs[i].policy_p = 2;
    recs[i].policy_k = 4;
    recs[i].max_inter_obs = 7;
  }
  // 3 successful attacks, 1 of them missed.
  recs[0].attack_success = true;
  recs[1].attack_success = true;
  recs[2].attack_success = true;
  recs[2].detection_missed = true;
  // 4 records carry verdicts: 3 secure, 1 not.
  recs[0].secure_verdict = true;
  recs[1].secure_verdict = true;
  recs[2].secure_verdict = false;
  recs[3].secure_verdict = true;

  auto rows = compute_metrics(recs, GroupBy::None);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].group == "all");
  CHECK(rows[0].count == 10);
  CHECK(rows[0].positives == 3);
  CHECK(rows[0].attack_success_rate == doctest::Approx(0.3));
  CHECK(rows[0].detection_miss_rate == doctest::Approx(1.0 / 3.0));
  CHECK(rows[0].with_verdict == 4);
  CHECK(rows[0].secure_rate == doctest::Approx(0.75));

  SUBCASE("group labels") {
    CHECK(compute_metrics(recs, GroupBy::Robots)[0].group == "0005");
    CHECK(compute_metrics(recs, GroupBy::Policy)[0].group == "p2k4");
    CHECK(compute_metrics(recs, GroupBy::InterObsBin)[0].group == "005-009");
    recs[0].max_inter_obs = 3;
    recs[1].max_inter_obs = 12;
    auto bins = compute_metrics(recs, GroupBy::InterObsBin);
    REQUIRE(bins.size() == 3);
    CHECK(bins[0].group == "000-004");
    CHECK(bins[1].group == "005-009");
    CHECK(bins[2].group == "010-014");
    CHECK(bins[0].count == 1);
    CHECK(bins[1].count == 8);
    CHECK(bins[2].count == 1);
  }

  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(compute_metrics({}, GroupBy::None),
                    std::invalid_argument);
  }
}

TEST_CASE("exact model: unreachable forbidden region is secure") {
  GridWorld w = make_world({".@."});
  w.set_forbidden({cell(w, 0, 2)});
  MapfPlan plan = plan_of(w, {{{0, 0}, {0, 0}, {0, 0}}});
  OracleResult res = oracle_check(w, plan, full_announcement(plan, 0), 0);
  CHECK(res.status == OracleStatus::Secure);
}

TEST_CASE("exact model returns the constructed counterexample") {
  Counterexample c = counterexample_fixture();
  OracleResult res = oracle_check(c.world, c.plan, c.full, c.attacker);
  REQUIRE(res.status == OracleStatus::Counterexample);
  REQUIRE(res.deviation.has_value());
  CHECK(res.deviation->robot == c.attacker);
  CHECK_FALSE(validate_deviation(c.world, c.plan, *res.deviation).has_value());
  CHECK(is_forbidden_deviation(c.world, c.plan, *res.deviation));
  CHECK(surely_undetected(c.world, c.plan, c.full, *res.deviation));
}

TEST_CASE("exact model agrees the worked example is secure") {
  Fig1 f = fig1_fixture();
  OracleResult res = oracle_check(f.world, f.plan, f.announced, 0);
  CHECK(res.status == OracleStatus::Secure);
}

TEST_CASE("exact model refuses rather than guesses") {
  Counterexample c = counterexample_fixture();
  OracleResult tiny = oracle_check(c.world, c.plan, c.full, c.attacker, 2);
  CHECK(tiny.status == OracleStatus::Infeasible);
  CHECK_FALSE(tiny.deviation.has_value());

  GridWorld w = open_grid(6, 6);
  MapfPlan plan;
  for (int i = 0; i < 6; ++i)
    plan.paths.push_back({cell(w, i, 0), cell(w, i, 0), cell(w, i, 0)});
  w.set_forbidden({cell(w, 0, 5)});
  OracleResult many = oracle_check(w, plan, full_announcement(plan, 0), 0);
  CHECK(many.status == OracleStatus::Infeasible);
}

TEST_CASE("exact model: one-step windows admit no deviation") {
  Counterexample c = counterexample_fixture();
  Announcement one = slice_announcement(c.plan, PkPolicy{1, 1}, 0);
  OracleResult res = oracle_check(c.world, c.plan, one, c.attacker);
  CHECK(res.status == OracleStatus::Secure);
}
