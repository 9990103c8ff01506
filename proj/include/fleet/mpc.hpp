#pragma once

#include <span>
#include <vector>

#include "fleet/environment.hpp"
#include "fleet/planner.hpp"

namespace fleet {

struct RobotState {
  double x{0.0};
  double y{0.0};
  double theta{0.0};
  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct Action {
  double v{0.0};
  double omega{0.0};
  friend bool operator==(const Action&, const Action&) = default;
};

/// Unicycle, explicit Euler; heading wrapped to (-pi, pi].
RobotState motion_model(RobotState s, Action u, double dt);

/// One stage of the tracking cost; the heading error is wrapped.
double cost_reference(const RobotState& s, const TrajPoint& ref, const Action& u, const Action& u_ref,
                      const Action& u_prev, const MpcParams& p);

/// weight * sum over polygons of max(0, inflation - signed_distance)^2.
/// Adds the gradient w.r.t. z into `grad` when given.
double cost_obstacle(Vec2 z, std::span<const Polygon> obstacles, double weight, double inflation,
                     Vec2* grad = nullptr);

/// q * max(0, d_fleet - |zi - zj|)^2
double cost_fleet(Vec2 zi, Vec2 zj, double q, double d_fleet);

struct NeighborPlan {
  VehicleIndex vehicle{};
  std::vector<Vec2> positions;  // N predicted positions
};

struct MpcProblem {
  RobotState start;
  Action previous;                    // action applied at the last step
  std::vector<TrajPoint> reference;   // N points
  double reference_speed{0.0};
  std::vector<NeighborPlan> neighbors;
  std::span<const Polygon> obstacles;
  MpcParams params;
  double max_speed{1.0};              // vehicle cap on v, on top of params.u_max
};

/// Total cost of an action sequence; gradient by the adjoint recursion when
/// `grad` is given. `positions` receives the rolled-out positions z_1..z_N.
double mpc_cost(const MpcProblem& problem, std::span<const Action> u, std::vector<Action>* grad = nullptr,
                std::vector<Vec2>* positions = nullptr);

/// Sequential clamp to the action box and the rate box relative to the
/// preceding action (u_{-1} = previous). Every output satisfies both.
void project_actions(std::vector<Action>& u, const Action& previous, const MpcParams& p, double max_speed);

struct MpcSolution {
  std::vector<Action> actions;
  std::vector<Vec2> positions;
  double cost{0.0};
  int iterations{0};
  bool fallback{false};          // non-finite cost; braking sequence returned
  std::vector<double> history;   // objective after each accepted iterate
};

/// Projected gradient with Barzilai-Borwein steps and backtracking; only
/// decreasing iterates are accepted.
MpcSolution solve_mpc(const MpcProblem& problem, std::span<const Action> warm_start);

}  // namespace fleet
