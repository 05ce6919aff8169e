#pragma once

#include <optional>

#include "hola/plan.hpp"
#include "hola/world.hpp"

namespace hola {

enum class OracleStatus { Secure, Counterexample, Infeasible };

struct OracleResult {
  OracleStatus status = OracleStatus::Infeasible;
  // A forbidden deviation no plan continuation can detect, present exactly
  // when status == Counterexample.
  std::optional<Deviation> deviation;
  long long states_explored = 0;

  bool secure() const { return status == OracleStatus::Secure; }
};

// Ground-truth check by exhaustive enumeration: considers every deviation
// by the attacker that starts at ann.t, stays inside the window where its
// own path is announced, visits a forbidden cell strictly inside the
// window, and rejoins; secure means every one of them is detected under at
// least one conflict-free continuation of the announced prefixes. The joint
// configuration space is capped at `budget` states; exceeding it yields
// Infeasible, never a silent pass.
OracleResult oracle_check(const GridWorld& w, const MapfPlan& plan,
                          const Announcement& ann, RobotId attacker,
                          long long budget = 10'000'000);

}  // namespace hola
