#include "hola/json_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hola {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json parse(const std::string& text, const char* what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw std::runtime_error(std::string(what) + ": malformed JSON");
  return j;
}

ordered_json rc_json(RowCol rc) { return ordered_json::array({rc.row, rc.col}); }

RowCol rc_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer())
    throw std::runtime_error(std::string(what) +
                             ": expected a [row, col] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

CellId require_cell(const GridWorld& w, RowCol rc, const char* what) {
  CellId c = w.cell_at(rc.row, rc.col);
  if (c < 0)
    throw std::runtime_error(std::string(what) + ": cell (" +
                             std::to_string(rc.row) + "," +
                             std::to_string(rc.col) +
                             ") is blocked or out of bounds");
  return c;
}

std::string fmt_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

std::string fmt_rate(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", r);
  return buf;
}

}  // namespace

std::string to_string(AttackerKind k) {
  switch (k) {
    case AttackerKind::None: return "none";
    case AttackerKind::Stealthy: return "stealthy";
    case AttackerKind::Bold: return "bold";
  }
  return "none";
}

AttackerKind attacker_kind_from_string(const std::string& s) {
  if (s == "none") return AttackerKind::None;
  if (s == "stealthy") return AttackerKind::Stealthy;
  if (s == "bold") return AttackerKind::Bold;
  throw std::runtime_error("unknown attacker kind: " + s);
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Full: return "full";
    case PolicyKind::Pk: return "pk";
    case PolicyKind::Synth: return "synth";
  }
  return "full";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "full") return PolicyKind::Full;
  if (s == "pk") return PolicyKind::Pk;
  if (s == "synth") return PolicyKind::Synth;
  throw std::runtime_error("unknown announcement policy: " + s);
}

std::string plan_to_json(const GridWorld& w, const MapfPlan& plan) {
  ordered_json robots = ordered_json::array();
  for (RobotId i = 0; i < plan.num_robots(); ++i) {
    ordered_json path = ordered_json::array();
    for (CellId c : plan.paths[i]) path.push_back(rc_json(w.rc(c)));
    robots.push_back({{"id", i}, {"path", std::move(path)}});
  }
  ordered_json j{{"robots", std::move(robots)}};
  return j.dump(2) + "\n";
}

MapfPlan plan_from_json(const GridWorld& w, const std::string& text) {
  ordered_json j = parse(text, "plan");
  if (!j.contains("robots") || !j["robots"].is_array())
    throw std::runtime_error("plan: missing robots array");
  const auto& robots = j["robots"];
  MapfPlan plan;
  plan.paths.resize(robots.size());
  for (const auto& entry : robots) {
    if (!entry.contains("id") || !entry["id"].is_number_integer() ||
        !entry.contains("path") || !entry["path"].is_array())
      throw std::runtime_error("plan: each robot needs an id and a path");
    const int id = entry["id"].get<int>();
    if (id < 0 || id >= static_cast<int>(robots.size()))
      throw std::runtime_error("plan: robot ids must be dense 0..R-1");
    if (!plan.paths[id].empty())
      throw std::runtime_error("plan: duplicate robot id " +
                               std::to_string(id));
    for (const auto& step : entry["path"])
      plan.paths[id].push_back(
          require_cell(w, rc_from_json(step, "plan"), "plan"));
    if (plan.paths[id].empty())
      throw std::runtime_error("plan: empty path for robot " +
                               std::to_string(id));
  }
  return plan;
}

std::string announcement_to_json(const Announcement& ann) {
  ordered_json horizons = ordered_json::object();
  for (size_t i = 0; i < ann.horizon.size(); ++i)
    horizons[std::to_string(i)] = ann.horizon[i];
  ordered_json j{{"t", ann.t}, {"horizons", std::move(horizons)}};
  return j.dump(2) + "\n";
}

Announcement announcement_from_json(const std::string& text) {
  ordered_json j = parse(text, "announcement");
  if (!j.contains("t") || !j["t"].is_number_integer() ||
      !j.contains("horizons") || !j["horizons"].is_object())
    throw std::runtime_error("announcement: need fields t and horizons");
  Announcement ann;
  ann.t = j["t"].get<int>();
  const auto& hz = j["horizons"];
  ann.horizon.assign(hz.size(), 0);
  for (const auto& [key, value] : hz.items()) {
    int id = -1;
    try {
      id = std::stoi(key);
    } catch (...) {
      throw std::runtime_error("announcement: non-numeric robot id " + key);
    }
    if (id < 0 || id >= static_cast<int>(hz.size()))
      throw std::runtime_error("announcement: robot ids must be dense");
    if (!value.is_number_integer())
      throw std::runtime_error("announcement: horizon must be an integer");
    ann.horizon[id] = value.get<int>();
  }
  return ann;
}

std::string instance_to_json(const InstanceFile& inst) {
  ordered_json agents = ordered_json::array();
  for (size_t i = 0; i < inst.starts.size(); ++i)
    agents.push_back({{"id", static_cast<int>(i)},
                      {"start", rc_json(inst.starts[i])},
                      {"goal", rc_json(inst.goals[i])}});
  ordered_json j{{"map", inst.map_path}, {"agents", std::move(agents)}};
  return j.dump(2) + "\n";
}

InstanceFile instance_from_json(const std::string& text) {
  ordered_json j = parse(text, "instance");
  if (!j.contains("map") || !j["map"].is_string() || !j.contains("agents") ||
      !j["agents"].is_array())
    throw std::runtime_error("instance: need fields map and agents");
  InstanceFile inst;
  inst.map_path = j["map"].get<std::string>();
  const auto& agents = j["agents"];
  inst.starts.resize(agents.size());
  inst.goals.resize(agents.size());
  std::vector<char> seen(agents.size(), 0);
  for (const auto& agent : agents) {
    if (!agent.contains("id") || !agent["id"].is_number_integer() ||
        !agent.contains("start") || !agent.contains("goal"))
      throw std::runtime_error("instance: each agent needs id, start, goal");
    const int id = agent["id"].get<int>();
    if (id < 0 || id >= static_cast<int>(agents.size()) || seen[id])
      throw std::runtime_error("instance: agent ids must be dense and unique");
    seen[id] = 1;
    inst.starts[id] = rc_from_json(agent["start"], "instance");
    inst.goals[id] = rc_from_json(agent["goal"], "instance");
  }
  return inst;
}

LoadedInstance load_instance(const std::string& path) {
  InstanceFile inst = instance_from_json(read_file(path));
  std::filesystem::path map_path(inst.map_path);
  if (map_path.is_relative())
    map_path = std::filesystem::path(path).parent_path() / map_path;
  LoadedInstance out;
  out.world = GridWorld::load_map(map_path.string());
  for (size_t i = 0; i < inst.starts.size(); ++i) {
    out.starts.push_back(require_cell(out.world, inst.starts[i], "instance"));
    out.goals.push_back(require_cell(out.world, inst.goals[i], "instance"));
  }
  return out;
}

std::string verdict_to_json(const ScheduleVerdict& v, bool include_timing) {
  ordered_json cells = ordered_json::array();
  for (const auto& cell : v.cells)
    cells.push_back({{"s", cell.s},
                     {"attacker", cell.attacker},
                     {"verdict", cell.outcome.secure()},
                     {"u_star", cell.outcome.u_star},
                     {"restarts", cell.outcome.restarts}});
  ordered_json j{{"overall", v.secure},
                 {"cells", std::move(cells)},
                 {"wall_time_ms", include_timing ? v.wall_ms : 0.0}};
  return j.dump(2) + "\n";
}

std::string scenario_to_json(const Scenario& sc,
                             const std::string& map_rel_path) {
  const GridWorld& w = sc.world;
  InstanceFile inst;
  inst.map_path = map_rel_path;
  for (CellId c : sc.starts) inst.starts.push_back(w.rc(c));
  for (CellId c : sc.goals) inst.goals.push_back(w.rc(c));

  ordered_json plan_robots = ordered_json::array();
  for (RobotId i = 0; i < sc.plan.num_robots(); ++i) {
    ordered_json path = ordered_json::array();
    for (CellId c : sc.plan.paths[i]) path.push_back(rc_json(w.rc(c)));
    plan_robots.push_back({{"id", i}, {"path", std::move(path)}});
  }

  ordered_json policy{{"kind", to_string(sc.policy.kind)},
                      {"p", sc.policy.p},
                      {"k", sc.policy.k},
                      {"k_max", sc.policy.k_max}};
  ordered_json attacker{{"robot", sc.attacker.robot},
                        {"kind", to_string(sc.attacker.kind)}};
  ordered_json atk_cands = ordered_json::array();
  for (RobotId r : sc.attacker_candidates) atk_cands.push_back(r);
  ordered_json forb_cands = ordered_json::array();
  for (CellId c : sc.forbidden_candidates) forb_cands.push_back(rc_json(w.rc(c)));

  ordered_json j{
      {"id", sc.id},
      {"instance", parse(instance_to_json(inst), "instance")},
      {"plan", ordered_json{{"robots", std::move(plan_robots)}}},
      {"policy", std::move(policy)},
      {"attacker", std::move(attacker)},
      {"forbidden", rc_json(w.rc(sc.forbidden))},
      {"seed", sc.seed},
      {"attacker_candidates", std::move(atk_cands)},
      {"forbidden_candidates", std::move(forb_cands)}};
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  ordered_json j = parse(read_file(path), "scenario");
  for (const char* field :
       {"id", "instance", "plan", "policy", "attacker", "forbidden", "seed"})
    if (!j.contains(field))
      throw std::runtime_error(std::string("scenario: missing field ") +
                               field);

  Scenario sc;
  sc.id = j["id"].get<std::string>();

  InstanceFile inst = instance_from_json(j["instance"].dump());
  std::filesystem::path map_path(inst.map_path);
  if (map_path.is_relative())
    map_path = std::filesystem::path(path).parent_path() / map_path;
  GridWorld world = GridWorld::load_map(map_path.string());

  for (size_t i = 0; i < inst.starts.size(); ++i) {
    sc.starts.push_back(require_cell(world, inst.starts[i], "scenario"));
    sc.goals.push_back(require_cell(world, inst.goals[i], "scenario"));
  }
  sc.plan = plan_from_json(world, j["plan"].dump());

  const auto& pol = j["policy"];
  sc.policy.kind = policy_kind_from_string(pol.at("kind").get<std::string>());
  sc.policy.p = pol.value("p", 1);
  sc.policy.k = pol.value("k", 1);
  sc.policy.k_max = pol.value("k_max", 10);

  const auto& atk = j["attacker"];
  sc.attacker.robot = atk.at("robot").get<int>();
  sc.attacker.kind =
      attacker_kind_from_string(atk.at("kind").get<std::string>());

  sc.forbidden =
      require_cell(world, rc_from_json(j["forbidden"], "scenario"), "scenario");
  sc.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("attacker_candidates"))
    for (const auto& r : j["attacker_candidates"])
      sc.attacker_candidates.push_back(r.get<int>());
  if (j.contains("forbidden_candidates"))
    for (const auto& f : j["forbidden_candidates"])
      sc.forbidden_candidates.push_back(
          require_cell(world, rc_from_json(f, "scenario"), "scenario"));

  world.set_forbidden({sc.forbidden});
  sc.world = std::move(world);
  return sc;
}

std::string metrics_csv(const std::vector<MetricsRecord>& records,
                        bool include_timings) {
  std::ostringstream out;
  out << "scenario_id,robots,policy_p,policy_k,attacker_kind,attack_success,"
         "detection_missed,first_detection_t,max_inter_obs,secure_verdict,"
         "verify_ms,sim_ms\n";
  for (const auto& r : records) {
    out << r.scenario_id << ',' << r.robots << ',' << r.policy_p << ','
        << r.policy_k << ',' << to_string(r.attacker_kind) << ','
        << (r.attack_success ? 1 : 0) << ',' << (r.detection_missed ? 1 : 0)
        << ',';
    if (r.first_detection_t) out << *r.first_detection_t;
    out << ',' << r.max_inter_obs << ',';
    if (r.secure_verdict) out << (*r.secure_verdict ? 1 : 0);
    out << ',' << fmt_ms(include_timings ? r.verify_ms : 0.0) << ','
        << fmt_ms(include_timings ? r.sim_ms : 0.0) << '\n';
  }
  return out.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "group,count,with_verdict,secure_rate,positives,attack_success_rate,"
         "detection_miss_rate\n";
  for (const auto& r : rows)
    out << r.group << ',' << r.count << ',' << r.with_verdict << ','
        << fmt_rate(r.secure_rate) << ',' << r.positives << ','
        << fmt_rate(r.attack_success_rate) << ','
        << fmt_rate(r.detection_miss_rate) << '\n';
  return out.str();
}

std::string aggregate_json(const std::vector<AggregateRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"group", r.group},
                   {"count", r.count},
                   {"with_verdict", r.with_verdict},
                   {"secure_rate", r.secure_rate},
                   {"positives", r.positives},
                   {"attack_success_rate", r.attack_success_rate},
                   {"detection_miss_rate", r.detection_miss_rate}});
  return arr.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace hola
