#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fleet/capacity.hpp"
#include "fleet/mpc.hpp"

namespace fleet {

struct ArrivalEvent {
  VehicleIndex vehicle{};
  NodeIndex node{};
  std::size_t entry{0};  // index in the vehicle's schedule
  double scheduled{0.0};
  double actual{0.0};
  double delay() const { return actual - scheduled; }
};

struct TraceRow {
  long step{0};
  VehicleIndex vehicle{};
  RobotState state;
  Action action;
};

struct PlannerTraceRow {
  long step{0};
  VehicleIndex vehicle{};
  double speed{0.0};
  std::size_t anchor{0};
  std::size_t target{0};
  bool holding{false};
  bool parked{false};
  bool finishing{false};  // every scheduled node reached, heading for the parking spot
};

struct SimLog {
  double dt{0.1};
  long steps{0};
  bool completed{false};
  std::vector<ArrivalEvent> arrivals;
  std::vector<TraceRow> trace;             // step-major, vehicles in scenario order; row 0 of each vehicle is the start
  std::vector<PlannerTraceRow> planner;
  std::vector<double> min_separation;      // per step, over all robot pairs
  long fallbacks{0};                       // MPC solves that returned the braking sequence
};

/// Dwell at each visit comes from the task served there (0 elsewhere).
SimLog run_simulation(const Scenario& scenario, const Schedule& schedule, const RouteSet& routes);

struct AuditFinding {
  std::string kind;  // separation, obstacle, deadlock
  VehicleIndex vehicle{};
  std::optional<VehicleIndex> other;
  double start{0.0};
  double end{0.0};
  double value{0.0};  // worst separation / deepest penetration / stationary duration
};

struct AuditReport {
  double min_separation{INFINITY};
  double min_obstacle_distance{INFINITY};
  std::vector<AuditFinding> findings;
  bool clean() const { return findings.empty(); }
};

/// Robots closer than the sum of their footprint radii, centres inside an
/// obstacle, and stretches of at least deadlock_window seconds without moving
/// more than deadlock_epsilon while neither holding nor done.
AuditReport safety_audit(const SimLog& log, const Scenario& scenario);

}  // namespace fleet
