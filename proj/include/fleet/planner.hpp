#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fleet/capacity.hpp"

namespace fleet {

struct TrajPoint {
  double x{0.0};
  double y{0.0};
  double heading{0.0};
  friend bool operator==(const TrajPoint&, const TrajPoint&) = default;
};

/// Dense max-speed sampling of a vehicle's scheduled node sequence.
struct GlobalTrajectory {
  std::vector<TrajPoint> points;
  std::vector<double> arc;               // cumulative arc length at each point
  std::vector<std::size_t> node_marks;   // point index of each schedule entry
  double spacing{0.0};                   // nominal step, max_speed * dt
};

/// Polyline through the entries' node positions (optionally starting and
/// ending at an off-graph parking spot). Each segment is cut into
/// ceil(length / spacing) equal pieces. A point's heading is the bearing of
/// the segment leaving it (the last point keeps the final bearing).
GlobalTrajectory precompute_global(std::span<const ScheduleEntry> entries, const Graph& graph,
                                   double max_speed, double dt,
                                   std::optional<Vec2> parking = std::nullopt);

/// min(max_speed, remaining / (t_next - t)); max_speed once t >= t_next.
double desired_speed(double t, double t_next, double remaining, double max_speed);

struct LocalReference {
  std::vector<TrajPoint> points;  // exactly N
  double speed{0.0};
  std::size_t anchor{0};
};

/// Anchor: nearest global point to `position` among indices
/// [hint, hint + window]. Output point i sits at fractional index
/// anchor + (i + 1) * speed / max_speed, linearly interpolated and padded with
/// the final point.
LocalReference local_reference(const GlobalTrajectory& global, Vec2 position, std::size_t hint,
                               double speed, double max_speed, int n, std::size_t window,
                               std::size_t stop_at = SIZE_MAX);

struct PlannerStep {
  LocalReference reference;
  std::size_t target{0};  // schedule entry being approached
  bool holding{false};    // waiting at a reached node for its departure time
};

/// Per-vehicle planner state. The simulator reports arrivals; the planner
/// turns time and position into a desired speed and local reference.
class LocalPlanner {
public:
  LocalPlanner(std::vector<ScheduleEntry> entries, std::vector<double> dwell, const Scenario& scenario,
               VehicleIndex vehicle);

  PlannerStep step(double t, Vec2 position);

  /// Entry `target()` was reached at time t.
  void arrive(double t);

  /// Waiting at the last reached node for its departure time.
  bool holding(double t) const;

  std::size_t target() const { return target_; }
  bool all_arrived() const { return target_ >= entries_.size(); }
  Vec2 target_position() const;
  Vec2 terminal_position() const;
  const GlobalTrajectory& global() const { return global_; }
  const std::vector<ScheduleEntry>& entries() const { return entries_; }

private:
  double departure_time(std::size_t reached) const;
  bool sharp_turn(std::size_t entry) const;

  static constexpr double kSharpTurn = 2.0;  // rad

  std::vector<ScheduleEntry> entries_;
  std::vector<double> dwell_;
  const Scenario* scenario_;
  double max_speed_;
  double nominal_speed_;
  int horizon_;
  GlobalTrajectory global_;
  std::size_t target_{0};
  std::size_t hint_{0};
  std::optional<double> last_arrival_;
};

}  // namespace fleet
