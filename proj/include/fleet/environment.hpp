#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fleet/geometry.hpp"

namespace fleet {

enum class NodeIndex : std::uint32_t {};
enum class EdgeIndex : std::uint32_t {};
enum class TaskIndex : std::uint32_t {};
enum class VehicleIndex : std::uint32_t {};

template <typename E>
constexpr std::size_t idx(E e) {
  return static_cast<std::size_t>(e);
}
template <typename E>
constexpr E make_index(std::size_t i) {
  return static_cast<E>(static_cast<std::uint32_t>(i));
}

enum class NodeKind { depot, task_location, intersection };
enum class Capacity { narrow, wide };

struct Node {
  std::string id;
  Vec2 position;
  NodeKind kind{NodeKind::intersection};
  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  NodeIndex from{};
  NodeIndex to{};
  double length{0.0};
  Capacity capacity{Capacity::narrow};
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct TimeWindow {
  double earliest{0.0};
  double latest{0.0};
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct Task {
  std::string id;
  NodeIndex node{};
  TimeWindow window;
  std::vector<TaskIndex> predecessors;
  std::string required_capability;  // empty: any vehicle
  double dwell{0.0};                // simulator-only service time, seconds
  friend bool operator==(const Task&, const Task&) = default;
};

struct Vehicle {
  std::string id;
  NodeIndex depot{};
  double nominal_speed{1.0};
  double max_speed{1.0};
  double range{0.0};
  std::vector<std::string> capabilities;
  double footprint_radius{0.3};
  std::optional<Vec2> parking;  // off-graph parking spot beside the depot

  bool capable_of(const Task& task) const;
  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

/// Directed road graph. Immutable once built.
class Graph {
public:
  Graph() = default;
  Graph(std::vector<Node> nodes, std::vector<Edge> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(NodeIndex n) const { return nodes_[idx(n)]; }
  const Edge& edge(EdgeIndex e) const { return edges_[idx(e)]; }
  const std::vector<EdgeIndex>& out_edges(NodeIndex n) const { return out_[idx(n)]; }

  std::optional<NodeIndex> find_node(const std::string& id) const;
  std::optional<EdgeIndex> find_edge(NodeIndex from, NodeIndex to) const;

  /// The reverse edge (n', n) of e = (n, n'). Throws std::out_of_range if e or
  /// its reverse is not part of the graph.
  EdgeIndex inverse_edge(EdgeIndex e) const;

  bool strongly_connected() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

private:
  static std::uint64_t key(NodeIndex a, NodeIndex b) {
    return (static_cast<std::uint64_t>(idx(a)) << 32) | idx(b);
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::unordered_map<std::string, NodeIndex> by_name_;
  std::unordered_map<std::uint64_t, EdgeIndex> by_ends_;
};

struct MpcParams {
  int horizon{20};
  double dt{0.1};
  std::array<double, 3> q_state{10.0, 10.0, 0.5};  // x, y, heading
  std::array<double, 2> q_action{1.0, 0.05};       // v, omega
  std::array<double, 2> q_rate{0.5, 0.05};
  double q_fleet{1000.0};
  double d_fleet{1.0};
  std::array<double, 2> u_min{0.0, -2.0};
  std::array<double, 2> u_max{10.0, 2.0};  // v is further capped by the vehicle's max_speed
  std::array<double, 2> du_min{-3.0, -6.0};  // per second
  std::array<double, 2> du_max{1.5, 6.0};
  double obstacle_weight{1e4};
  double obstacle_inflation{0.5};
  double tolerance{1e-6};
  int max_iterations{40};
  friend bool operator==(const MpcParams&, const MpcParams&) = default;
};

struct PlannerParams {
  double speed_floor_ratio{0.05};
  int anchor_window{12};
  double park_ramp_distance{2.0};
  friend bool operator==(const PlannerParams&, const PlannerParams&) = default;
};

struct SimParams {
  double r_node{0.3};
  long max_steps{0};  // 0: derived from the schedule length
  double deadlock_window{10.0};
  double deadlock_epsilon{0.05};
  friend bool operator==(const SimParams&, const SimParams&) = default;
};

enum class WideEdgePolicy {
  tie_only,  // same-direction entries into a wide edge must merely not coincide
  full       // treat wide edges like narrow ones for same-direction separation
};

struct SchedulerParams {
  int k_paths{5};
  int max_iterations{50};
  long dtp_node_budget{2'000'000};
  WideEdgePolicy wide_edges{WideEdgePolicy::tie_only};
  friend bool operator==(const SchedulerParams&, const SchedulerParams&) = default;
};

struct Scenario {
  std::string name;
  std::string note;
  Graph graph;
  std::vector<Task> tasks;
  std::vector<Vehicle> vehicles;
  std::vector<Polygon> obstacles;
  double horizon{0.0};  // T, seconds
  double mu{20.0};      // safety margin, also used as the head-on clearing margin
  MpcParams mpc;
  PlannerParams planner;
  SimParams sim;
  SchedulerParams scheduler;

  const Task& task(TaskIndex t) const { return tasks[idx(t)]; }
  const Vehicle& vehicle(VehicleIndex v) const { return vehicles[idx(v)]; }
  std::optional<TaskIndex> find_task(const std::string& id) const;
  std::optional<VehicleIndex> find_vehicle(const std::string& id) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
public:
  enum class Kind { io, parse, validation };
  ScenarioError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& scenario);

/// Checks every scenario invariant; throws ScenarioError(validation) naming the
/// first violation.
void validate(const Scenario& scenario);

std::string_view to_string(NodeKind kind);
std::string_view to_string(Capacity capacity);

}  // namespace fleet
