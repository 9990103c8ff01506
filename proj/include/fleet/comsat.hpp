#pragma once

#include <string>

#include "fleet/capacity.hpp"

namespace fleet {

enum class ComsatStatus { feasible, infeasible, iteration_limit };

struct ComsatOutcome {
  ComsatStatus status{ComsatStatus::infeasible};
  Schedule schedule;      // feasible only
  RouteSet routes;        // routes and paths the schedule was built on
  std::string message;    // infeasibility certificate or limit note
  int capacity_checks{0};
  int routings{0};
};

/// Route, verify capacities, change paths on failure and re-route with the
/// failing assignment excluded once path alternatives run out.
ComsatOutcome comsat_schedule(const Scenario& scenario);

}  // namespace fleet
