#pragma once

// Instance generators and independent oracles shared by the unit tests and
// the acceptance runner. Nothing here calls into the solver under test.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fleet/dtp.hpp"
#include "fleet/environment.hpp"
#include "fleet/mpc.hpp"

namespace fleet::testing {

using Rng = std::mt19937_64;

/// Assembles a Scenario node by node. Roads are added in both directions.
class ScenarioBuilder {
public:
  explicit ScenarioBuilder(double horizon = 600.0);

  NodeIndex node(const std::string& id, double x, double y, NodeKind kind = NodeKind::intersection);
  void road(const std::string& a, const std::string& b, Capacity cap = Capacity::narrow,
            std::optional<double> length = std::nullopt);
  VehicleIndex vehicle(const std::string& id, const std::string& depot, std::vector<std::string> caps = {},
                       double range = 1e6);
  TaskIndex task(const std::string& id, const std::string& node, std::string capability = {},
                 std::optional<TimeWindow> window = std::nullopt, std::vector<std::string> predecessors = {});

  Scenario& raw() { return sc_; }
  Scenario build() const;

private:
  Scenario sc_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  struct PendingVehicle {
    Vehicle v;
    std::string depot;
  };
  struct PendingTask {
    Task t;
    std::string node;
    std::vector<std::string> preds;
  };
  std::vector<PendingVehicle> vehicles_;
  std::vector<PendingTask> tasks_;
};

/// rows x cols lattice named G{r}{c}, spacing metres apart, all roads narrow.
/// Depots at the listed (r, c) cells.
ScenarioBuilder grid_builder(int rows, int cols, double spacing, const std::vector<std::pair<int, int>>& depots,
                             double horizon = 600.0);

/// Directed graph with a Hamiltonian ring (so strongly connected) plus random
/// chords; integer lengths in [1, 20] so path sums are exact.
Graph random_graph(Rng& rng, std::size_t n, double chord_probability);

/// All-pairs shortest distances by Floyd-Warshall; +inf when unreachable.
std::vector<std::vector<double>> floyd_warshall(const Graph& graph);

/// Consistency of hard constraints plus one option per disjunction, decided
/// by negative-cycle detection on the distance graph (Floyd-Warshall).
bool difference_system_consistent(std::size_t variables, const std::vector<DiffConstraint>& constraints);

/// Tries all 2^k disjunct selections.
bool dtp_brute_force(const Dtp& dtp);

/// Random DTP over a handful of variables with at most max_disjunctions disjunctions.
Dtp random_dtp(Rng& rng, std::size_t max_disjunctions);

struct RoutingOptimum {
  bool feasible{false};
  double distance{0.0};
};

/// Exhaustive enumeration over assignments, visiting orders and recharge
/// insertions, with nominal timing by fixed-point iteration.
RoutingOptimum exhaustive_routing(const Scenario& scenario);

/// 3x3 weighted grid, one or two vehicles, one to four tasks.
Scenario random_routing_instance(Rng& rng);

/// Small grid with mixed road classes, two or three vehicles, a few tasks.
Scenario random_scheduling_instance(Rng& rng);

/// Random MPC problem around a straight reference, with one obstacle and
/// one neighbour; obstacles live in `storage`.
MpcProblem random_mpc_problem(Rng& rng, std::vector<Polygon>& storage);

/// Random in-bounds action sequence for `problem`.
std::vector<Action> random_actions(Rng& rng, const MpcProblem& problem);

/// Max-norm relative error between the adjoint gradient and central
/// differences with step h.
double gradient_relative_error(const MpcProblem& problem, const std::vector<Action>& u, double h = 1e-6);

/// Bounds-and-rates check with no tolerance.
bool actions_within_bounds(const std::vector<Action>& u, const Action& previous, const MpcParams& p,
                           double max_speed);

/// Signed distance to an axis-aligned square by sampling its boundary at
/// `samples` points per side and refining the best sample by ternary search.
double square_signed_distance(Vec2 lo, Vec2 hi, Vec2 p, int samples = 4000);

}  // namespace fleet::testing
