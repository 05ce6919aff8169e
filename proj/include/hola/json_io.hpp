#pragma once

#include <string>
#include <vector>

#include "hola/plan.hpp"
#include "hola/sim.hpp"
#include "hola/verify.hpp"
#include "hola/world.hpp"

namespace hola {

// ---- enum names shared by files and CLI flags ----
std::string to_string(AttackerKind k);
AttackerKind attacker_kind_from_string(const std::string& s);
std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

// ---- plan files: {"robots": [{"id", "path": [[row,col],...]}]} ----
std::string plan_to_json(const GridWorld& w, const MapfPlan& plan);
MapfPlan plan_from_json(const GridWorld& w, const std::string& text);

// ---- announcements: {"t", "horizons": {"<robot id>": horizon}} ----
std::string announcement_to_json(const Announcement& ann);
Announcement announcement_from_json(const std::string& text);

// ---- instance files: {"map": <path>, "agents": [{"id","start","goal"}]} ----
struct InstanceFile {
  std::string map_path;  // as written in the file (relative to it)
  std::vector<RowCol> starts;
  std::vector<RowCol> goals;
};
std::string instance_to_json(const InstanceFile& inst);
InstanceFile instance_from_json(const std::string& text);

struct LoadedInstance {
  GridWorld world;
  std::vector<CellId> starts;
  std::vector<CellId> goals;
};
// Reads the instance file and its map (resolved relative to the instance
// file's directory). Throws std::runtime_error on unreadable or
// inconsistent content.
LoadedInstance load_instance(const std::string& path);

// ---- verification verdicts ----
// {"overall", "cells": [{"s","attacker","verdict","u_star","restarts"}],
//  "wall_time_ms"}; wall time written as 0 unless include_timing.
std::string verdict_to_json(const ScheduleVerdict& v, bool include_timing);

// ---- scenario files (instance-compatible, self-describing) ----
std::string scenario_to_json(const Scenario& sc,
                             const std::string& map_rel_path);
// Loads a scenario; the embedded map path resolves relative to the scenario
// file's directory.
Scenario load_scenario(const std::string& path);

// ---- metrics ----
// Exact column set consumed by the analysis tooling; timing columns are
// zeroed unless include_timings so repeated runs compare byte-identical.
std::string metrics_csv(const std::vector<MetricsRecord>& records,
                        bool include_timings);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string aggregate_json(const std::vector<AggregateRow>& rows);

// ---- small file helpers ----
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hola
