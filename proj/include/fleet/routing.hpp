#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fleet/environment.hpp"

namespace fleet {

/// Ordered list of unique nodes joined by edges.
struct Path {
  std::vector<NodeIndex> nodes;
  double length{0.0};
  friend bool operator==(const Path&, const Path&) = default;
};

/// Edges along a path; |edges| = |nodes| - 1.
std::vector<EdgeIndex> edge_sequence(const Graph& graph, const Path& path);

/// Sum of edge lengths along the node list; throws if two consecutive nodes
/// are not joined by an edge.
double path_length(const Graph& graph, std::span<const NodeIndex> nodes);

bool is_valid_path(const Graph& graph, const Path& path);

/// Single-source shortest paths (Dijkstra). Ties resolve towards the
/// lower node index so the result is deterministic.
class ShortestPathTree {
public:
  ShortestPathTree(const Graph& graph, NodeIndex source);
  double distance(NodeIndex target) const { return dist_[idx(target)]; }
  Path path_to(NodeIndex target) const;

private:
  NodeIndex source_;
  std::vector<double> dist_;
  std::vector<std::optional<NodeIndex>> parent_;
};

/// Shortest paths between every ordered pair of endpoints (task nodes and depots).
class PathTable {
public:
  PathTable() = default;
  PathTable(std::vector<NodeIndex> endpoints, std::vector<std::vector<Path>> paths);

  const std::vector<NodeIndex>& endpoints() const { return endpoints_; }
  bool contains(NodeIndex n) const;
  const Path& path(NodeIndex from, NodeIndex to) const;
  double length(NodeIndex from, NodeIndex to) const { return path(from, to).length; }

private:
  std::size_t slot(NodeIndex n) const;

  std::vector<NodeIndex> endpoints_;
  std::vector<std::size_t> slot_of_node_;
  std::vector<std::vector<Path>> paths_;
};

PathTable all_pairs_shortest_paths(const Graph& graph, std::span<const NodeIndex> endpoints);

/// Task nodes plus vehicle depots, sorted and deduplicated.
std::vector<NodeIndex> routing_endpoints(const Scenario& scenario);

struct Stop {
  std::optional<TaskIndex> task;  // nullopt: a visit to the vehicle's depot
  NodeIndex node{};
  friend bool operator==(const Stop&, const Stop&) = default;
};

/// Depot-to-depot stop sequence for one vehicle.
struct Route {
  VehicleIndex vehicle{};
  std::vector<Stop> stops;
  friend bool operator==(const Route&, const Route&) = default;
};

struct RouteSet {
  std::vector<Route> routes;             // one per vehicle, in scenario order
  std::vector<std::vector<Path>> legs;   // legs[r][k]: stop k -> stop k+1
  friend bool operator==(const RouteSet&, const RouteSet&) = default;

  double total_distance() const;
};

/// Identity of an assignment + ordering (+ recharge insertions), used to
/// exclude route sets that already failed capacity verification. Per
/// vehicle: task indices in visiting order, -1 for an intermediate depot visit.
using RouteKey = std::vector<std::vector<int>>;
RouteKey route_key(const RouteSet& routes);

enum class RoutingFailure {
  no_capable_vehicle,
  time_window_unreachable,
  range_insufficient,
  precedence_conflict,
  no_joint_solution,
  alternatives_exhausted
};

std::string_view to_string(RoutingFailure f);

struct RoutingInfeasible {
  RoutingFailure reason{RoutingFailure::no_joint_solution};
  std::optional<TaskIndex> task;
  std::string message;
};

using RoutingResult = std::variant<RouteSet, RoutingInfeasible>;

/// E-Routing: assigns every task to exactly one capable vehicle and orders
/// each vehicle's visits so that windows, precedence, range and the horizon
/// hold under nominal timing (travel at nominal speed along table paths, no
/// service time, early arrivals wait for the window to open). Among feasible
/// route sets the total distance is minimal; ties keep the first solution in
/// search order (vehicles by id, tasks by index, direct before recharge).
RoutingResult plan_routes(const Scenario& scenario, const PathTable& table,
                          const std::set<RouteKey>& excluded = {});

/// Per-stop arrival times under pure travel at `speed`, starting at 0.
std::vector<double> nominal_times(const Route& route, std::span<const Path> legs, double speed);

/// Assembles a RouteSet (legs taken from the table) from per-vehicle stop lists.
RouteSet make_route_set(const Scenario& scenario, const PathTable& table,
                        std::vector<Route> routes);

}  // namespace fleet
