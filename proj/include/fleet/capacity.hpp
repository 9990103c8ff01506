#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fleet/dtp.hpp"
#include "fleet/routing.hpp"

namespace fleet {

/// One node occurrence along a route's full node sequence.
struct Visit {
  NodeIndex node{};
  std::optional<EdgeIndex> in_edge;  // nullopt: first visit, or a stay at the same node
  std::optional<TaskIndex> task;     // set when this occurrence serves a task
  bool terminal{false};              // first or last visit (vehicle parked at its depot)
};

/// Full node sequence of route r: legs concatenated, shared endpoints merged.
/// A zero-length leg becomes a stay visit at the same node.
std::vector<Visit> route_visits(const Scenario& scenario, const RouteSet& routes, std::size_t r);

/// Index of the visit whose edge entry is the departure from visit i; the last
/// visit when the vehicle never leaves again.
std::size_t departure_visit(const std::vector<Visit>& visits, std::size_t i);

/// Gap between one vehicle leaving a shared node and the next one arriving:
/// mu less the leaver's incoming travel time, but never under mu / 2.
double node_clearance(double mu, double in_travel);

struct ScheduleEntry {
  VehicleIndex vehicle{};
  NodeIndex node{};
  double time{0.0};
  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Per-vehicle entry lists, indexed like Scenario::vehicles.
struct Schedule {
  std::vector<std::vector<ScheduleEntry>> per_vehicle;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Variable ids of the capacity problem, per route and visit.
struct CapacityProblem {
  Dtp dtp;
  std::vector<std::vector<int>> arrival;  // x per visit
  std::vector<std::vector<int>> entry;    // y per visit (-1 without an incoming edge)
  std::vector<std::vector<Visit>> visits;
};

/// Chaining, windows, precedence, horizon and the disjunctive families.
/// Disjunctions are ordered by nominal time and each lists the option that
/// agrees with the nominal order first.
CapacityProblem build_capacity_problem(const RouteSet& routes, const Scenario& scenario);

Schedule extract_schedule(const CapacityProblem& problem, const std::vector<double>& values,
                          const RouteSet& routes);

struct CapacityResult {
  DtpStatus status{DtpStatus::infeasible};
  Schedule schedule;
  long nodes{0};
  std::size_t disjunctions{0};
};

/// Builds and solves the capacity problem. With the tie-only wide-edge policy,
/// wide-edge entries that coincide exactly get a separation disjunction
/// (higher vehicle index later) and the problem is re-solved.
CapacityResult verify_capacity(const RouteSet& routes, const Scenario& scenario);

struct Violation {
  std::string family;  // node-exclusion, node-clearance, same-edge, head-on, chaining, window, precedence, horizon, structure
  std::string detail;
  double magnitude{0.0};  // seconds
};

struct ConflictReport {
  std::vector<Violation> violations;
  bool empty() const { return violations.empty(); }
};

/// Direct evaluation of every constraint family on the schedule's times.
ConflictReport verify_schedule(const Schedule& schedule, const RouteSet& routes,
                               const Scenario& scenario, double tolerance = 1e-6);

}  // namespace fleet
