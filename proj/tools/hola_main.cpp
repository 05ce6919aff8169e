// Command-line front end: plan / verify / announce / simulate / bench.
// Exit codes: 0 success, 1 negative verdict, 2 usage or contract error,
// 3 search budget exceeded.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hola/json_io.hpp"
#include "hola/oracle.hpp"
#include "hola/sim.hpp"
#include "hola/solver.hpp"
#include "hola/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("HOLA_WORKERS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

hola::RowCol parse_rc(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error("expected row,col but got: " + s);
  return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    hola::write_file(out_path, text);
}

struct PolicyFlags {
  std::string kind = "pk";
  int p = 1;
  int k = 1;
  int k_max = 10;

  hola::AnnouncementPolicy build() const {
    hola::AnnouncementPolicy pol;
    pol.kind = hola::policy_kind_from_string(kind);
    pol.p = p;
    pol.k = k;
    pol.k_max = k_max;
    if (pol.kind == hola::PolicyKind::Pk && (p < 1 || k < p))
      throw std::runtime_error("pk policy needs 1 <= p <= k");
    return pol;
  }
};

void add_policy_flags(CLI::App* cmd, PolicyFlags& pf) {
  cmd->add_option("--policy", pf.kind, "announcement policy: full, pk, synth")
      ->check(CLI::IsMember({"full", "pk", "synth"}));
  cmd->add_option("--p", pf.p, "pk policy: announcement period");
  cmd->add_option("--k", pf.k, "pk policy: released depth");
  cmd->add_option("--k-max", pf.k_max, "synth policy: depth ceiling");
}

// The announcement schedule a policy induces on a given plan. Synth runs
// the synthesis loop epoch by epoch, exactly as the simulator would.
std::vector<hola::Announcement> build_schedule(
    const hola::GridWorld& w, const hola::MapfPlan& plan,
    const hola::AnnouncementPolicy& pol, int workers) {
  const hola::Timestep T = plan.horizon();
  std::vector<hola::Announcement> schedule;
  switch (pol.kind) {
    case hola::PolicyKind::Full:
      schedule.push_back(hola::full_announcement(plan, 0));
      break;
    case hola::PolicyKind::Pk:
      for (hola::Timestep t = 0; t == 0 || (t < T && t % pol.p == 0);
           t += pol.p)
        schedule.push_back(
            hola::slice_announcement(plan, {pol.p, pol.k}, t));
      break;
    case hola::PolicyKind::Synth: {
      hola::Timestep t = 0;
      while (t < T || t == 0) {
        auto syn =
            hola::synthesize_max_announcement(w, plan, t, pol.k_max, workers);
        schedule.push_back(syn.announcement);
        hola::Timestep next = std::max(syn.announcement.horizon[0],
                                       static_cast<hola::Timestep>(t + 1));
        if (next >= T) break;
        t = next;
      }
      break;
    }
  }
  return schedule;
}

int cmd_plan(const std::string& instance_path, double w_subopt, int budget,
             const std::string& out_path) {
  auto inst = hola::load_instance(instance_path);
  hola::MapfInstance mi;
  mi.world = &inst.world;
  mi.starts = inst.starts;
  mi.goals = inst.goals;
  auto res = hola::plan_ecbs(mi, w_subopt, budget);
  if (res.status == hola::SolveStatus::BudgetExceeded) {
    std::cerr << "plan: node budget exceeded\n";
    return kExitBudget;
  }
  if (res.status == hola::SolveStatus::Unsolvable) {
    std::cerr << "plan: instance is unsolvable\n";
    return kExitUsage;
  }
  std::cout << "cost " << res.stats.cost << "\n"
            << "lower_bound " << res.stats.lower_bound << "\n"
            << "high_level_expanded " << res.stats.high_level_expanded << "\n";
  emit(hola::plan_to_json(inst.world, res.plan),
       out_path.empty() ? "plan.json" : out_path);
  return kExitOk;
}

int cmd_verify(const std::string& scenario_path,
               const std::string& instance_path, const std::string& plan_path,
               const std::vector<std::string>& forbidden,
               const std::string& announcement_path, const PolicyFlags& pf,
               bool policy_given, int workers, bool timings,
               const std::string& out_path) {
  hola::GridWorld world;
  hola::MapfPlan plan;
  hola::AnnouncementPolicy pol;

  if (!scenario_path.empty()) {
    auto sc = hola::load_scenario(scenario_path);
    world = std::move(sc.world);
    plan = std::move(sc.plan);
    pol = sc.policy;
  } else {
    if (instance_path.empty() || plan_path.empty())
      throw std::runtime_error(
          "verify needs --scenario, or --instance with --plan");
    auto inst = hola::load_instance(instance_path);
    world = std::move(inst.world);
    plan = hola::plan_from_json(world, hola::read_file(plan_path));
    std::vector<hola::CellId> cells;
    for (const auto& f : forbidden) {
      auto rc = parse_rc(f);
      auto c = world.cell_at(rc.row, rc.col);
      if (c < 0)
        throw std::runtime_error("forbidden cell is blocked or outside: " + f);
      cells.push_back(c);
    }
    world.set_forbidden(cells);
    pol = pf.build();
  }

  std::vector<hola::Announcement> schedule;
  if (!announcement_path.empty()) {
    if (policy_given)
      throw std::runtime_error("--announcement conflicts with --policy");
    schedule.push_back(
        hola::announcement_from_json(hola::read_file(announcement_path)));
  } else {
    schedule = build_schedule(world, plan, pol, workers);
  }

  auto verdict = hola::verify_schedule(world, plan, schedule, workers);
  emit(hola::verdict_to_json(verdict, timings), out_path);
  return verdict.secure ? kExitOk : kExitNegative;
}

int cmd_announce(const std::string& instance_path,
                 const std::string& plan_path,
                 const std::vector<std::string>& forbidden, int t, int k_max,
                 int workers, const std::string& out_path) {
  auto inst = hola::load_instance(instance_path);
  hola::GridWorld world = std::move(inst.world);
  auto plan = hola::plan_from_json(world, hola::read_file(plan_path));
  std::vector<hola::CellId> cells;
  for (const auto& f : forbidden) {
    auto rc = parse_rc(f);
    auto c = world.cell_at(rc.row, rc.col);
    if (c < 0)
      throw std::runtime_error("forbidden cell is blocked or outside: " + f);
    cells.push_back(c);
  }
  world.set_forbidden(cells);

  auto syn = hola::synthesize_max_announcement(world, plan, t, k_max, workers);
  nlohmann::ordered_json j{
      {"announcement",
       nlohmann::ordered_json::parse(
           hola::announcement_to_json(syn.announcement))},
      {"k", syn.k},
      {"verified", syn.verified}};
  emit(j.dump(2) + "\n", out_path);
  return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, bool no_coobs,
                 bool timings, int workers, const std::string& out_path) {
  auto sc = hola::load_scenario(scenario_path);
  hola::SimOptions opt;
  opt.ignore_observations = no_coobs;
  opt.workers = workers;
  auto rec = hola::run_simulation(sc, opt);
  emit(hola::metrics_csv({rec}, timings), out_path);
  return kExitOk;
}

int cmd_bench(int size, int robots, int obstacles, int count,
              std::uint64_t seed, const PolicyFlags& pf,
              const std::string& attacker, bool no_coobs, bool timings,
              int workers, const std::string& out_dir) {
  namespace fs = std::filesystem;
  hola::GenerateParams params;
  params.size = size;
  params.robots = robots;
  params.obstacles = obstacles;
  params.count = count;
  params.seed = seed;
  params.policy = pf.build();
  params.attacker_kind = hola::attacker_kind_from_string(attacker);

  auto scenarios = hola::generate_scenarios(params);

  fs::create_directories(fs::path(out_dir) / "maps");
  fs::create_directories(fs::path(out_dir) / "scenarios");
  for (const auto& sc : scenarios) {
    hola::write_file((fs::path(out_dir) / "maps" / (sc.id + ".map")).string(),
                     sc.world.to_map_text());
    hola::write_file(
        (fs::path(out_dir) / "scenarios" / (sc.id + ".json")).string(),
        hola::scenario_to_json(sc, "../maps/" + sc.id + ".map"));
  }

  std::vector<hola::MetricsRecord> records(scenarios.size());
  hola::SimOptions opt;
  opt.ignore_observations = no_coobs;
  opt.workers = 1;  // parallelism is across scenarios
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (size_t i = cursor.fetch_add(1); i < scenarios.size();
         i = cursor.fetch_add(1))
      records[i] = hola::run_simulation(scenarios[i], opt);
  };
  const int n = std::max(1, std::min<int>(workers, scenarios.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  hola::write_file((fs::path(out_dir) / "metrics.csv").string(),
                   hola::metrics_csv(records, timings));
  std::string agg_csv = "group,count,with_verdict,secure_rate,positives,"
                        "attack_success_rate,detection_miss_rate\n";
  std::string agg_json = "[]\n";
  if (!records.empty()) {
    auto rows = hola::compute_metrics(records, hola::GroupBy::None);
    agg_csv = hola::aggregate_csv(rows);
    agg_json = hola::aggregate_json(rows);
  }
  hola::write_file((fs::path(out_dir) / "aggregate.csv").string(), agg_csv);
  hola::write_file((fs::path(out_dir) / "aggregate.json").string(), agg_json);
  std::cout << agg_csv;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan-deviation attack toolkit: MAPF planning, announcement "
               "verification and synthesis, attack simulation"};
  app.require_subcommand(1);
  int workers_flag = 0;
  app.add_option("--workers", workers_flag,
                 "worker threads (default: HOLA_WORKERS or logical cores)")
      ->envname("HOLA_WORKERS");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "solve an instance with ECBS");
  std::string plan_instance, plan_out;
  double w_subopt = 1.3;
  int node_budget = 200000;
  plan_cmd->add_option("--instance", plan_instance)->required();
  plan_cmd->add_option("--w-subopt", w_subopt, "suboptimality factor");
  plan_cmd->add_option("--budget", node_budget, "high-level node budget");
  plan_cmd->add_option("--out", plan_out, "plan JSON path (default plan.json)");

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "verify an announcement schedule");
  std::string v_scenario, v_instance, v_plan, v_announcement, v_out;
  std::vector<std::string> v_forbidden;
  PolicyFlags v_policy;
  bool v_timings = false;
  verify_cmd->add_option("--scenario", v_scenario, "scenario JSON");
  verify_cmd->add_option("--instance", v_instance, "instance JSON");
  verify_cmd->add_option("--plan", v_plan, "plan JSON");
  verify_cmd->add_option("--forbidden", v_forbidden,
                         "forbidden cell row,col (repeatable)");
  verify_cmd->add_option("--announcement", v_announcement,
                         "verify one announcement file (t must be 0)");
  add_policy_flags(verify_cmd, v_policy);
  verify_cmd->add_flag("--timings", v_timings, "report wall time");
  verify_cmd->add_option("--out", v_out, "verdict JSON path (default stdout)");

  // announce
  auto* ann_cmd = app.add_subcommand(
      "announce", "synthesize the longest verified announcement");
  std::string a_instance, a_plan, a_out;
  std::vector<std::string> a_forbidden;
  int a_t = 0, a_k_max = 10;
  ann_cmd->add_option("--instance", a_instance)->required();
  ann_cmd->add_option("--plan", a_plan)->required();
  ann_cmd->add_option("--forbidden", a_forbidden,
                      "forbidden cell row,col (repeatable)");
  ann_cmd->add_option("--t", a_t, "announcement time");
  ann_cmd->add_option("--k-max", a_k_max, "depth ceiling");
  ann_cmd->add_option("--out", a_out, "output path (default stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run one scenario");
  std::string s_scenario, s_out;
  bool s_no_coobs = false, s_timings = false;
  sim_cmd->add_option("--scenario", s_scenario)->required();
  sim_cmd->add_flag("--no-coobs", s_no_coobs,
                    "detection ignores co-observations");
  sim_cmd->add_flag("--timings", s_timings, "report wall times");
  sim_cmd->add_option("--out", s_out, "metrics CSV path (default stdout)");

  // bench
  auto* bench_cmd = app.add_subcommand(
      "bench", "generate scenarios, simulate them, aggregate metrics");
  int b_size = 32, b_robots = 10, b_obstacles = 200, b_count = 1;
  std::uint64_t b_seed = 0;
  PolicyFlags b_policy;
  std::string b_attacker = "bold", b_out = "bench_out";
  bool b_no_coobs = false, b_timings = false;
  bench_cmd->add_option("--size", b_size, "grid side length");
  bench_cmd->add_option("--robots", b_robots);
  bench_cmd->add_option("--obstacles", b_obstacles);
  bench_cmd->add_option("--count", b_count, "number of scenarios");
  bench_cmd->add_option("--seed", b_seed, "master seed");
  add_policy_flags(bench_cmd, b_policy);
  bench_cmd->add_option("--attacker", b_attacker)
      ->check(CLI::IsMember({"none", "stealthy", "bold"}));
  bench_cmd->add_flag("--no-coobs", b_no_coobs,
                      "detection ignores co-observations");
  bench_cmd->add_flag("--timings", b_timings, "record wall times in the CSV");
  bench_cmd->add_option("--out", b_out, "output directory");

  // Let --workers (declared on the parent) appear after a subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const int workers = resolve_workers(workers_flag);
  try {
    if (plan_cmd->parsed())
      return cmd_plan(plan_instance, w_subopt, node_budget, plan_out);
    if (verify_cmd->parsed())
      return cmd_verify(v_scenario, v_instance, v_plan, v_forbidden,
                        v_announcement, v_policy,
                        verify_cmd->count("--policy") > 0, workers, v_timings,
                        v_out);
    if (ann_cmd->parsed())
      return cmd_announce(a_instance, a_plan, a_forbidden, a_t, a_k_max,
                          workers, a_out);
    if (sim_cmd->parsed())
      return cmd_simulate(s_scenario, s_no_coobs, s_timings, workers, s_out);
    if (bench_cmd->parsed())
      return cmd_bench(b_size, b_robots, b_obstacles, b_count, b_seed,
                       b_policy, b_attacker, b_no_coobs, b_timings, workers,
                       b_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
