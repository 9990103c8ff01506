#include "fleet/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fleet {

GlobalTrajectory precompute_global(std::span<const ScheduleEntry> entries, const Graph& graph,
                                   double max_speed, double dt, std::optional<Vec2> parking) {
  if (entries.empty()) throw std::invalid_argument("empty schedule");
  GlobalTrajectory g;
  g.spacing = max_speed * dt;

  std::vector<Vec2> waypoints;
  std::vector<bool> is_entry;
  if (parking) {
    waypoints.push_back(*parking);
    is_entry.push_back(false);
  }
  for (const ScheduleEntry& e : entries) {
    waypoints.push_back(graph.node(e.node).position);
    is_entry.push_back(true);
  }
  if (parking) {
    waypoints.push_back(*parking);
    is_entry.push_back(false);
  }

  g.points.push_back({waypoints[0].x, waypoints[0].y, 0.0});
  g.arc.push_back(0.0);
  if (is_entry[0]) g.node_marks.push_back(0);
  bool have_heading = false;
  for (std::size_t w = 1; w < waypoints.size(); ++w) {
    const Vec2 a = waypoints[w - 1];
    const Vec2 b = waypoints[w];
    const double len = distance(a, b);
    if (len > 1e-12) {
      const double bearing = std::atan2(b.y - a.y, b.x - a.x);
      g.points.back().heading = bearing;
      if (!have_heading) {
        for (auto& p : g.points) p.heading = bearing;
        have_heading = true;
      }
      const auto pieces = static_cast<std::size_t>(std::ceil(len / g.spacing - 1e-9));
      const double base = g.arc.back();
      for (std::size_t s = 1; s <= pieces; ++s) {
        const double f = static_cast<double>(s) / static_cast<double>(pieces);
        const Vec2 p = s == pieces ? b : a + f * (b - a);
        g.points.push_back({p.x, p.y, bearing});
        g.arc.push_back(base + f * len);
      }
    }
    if (is_entry[w]) g.node_marks.push_back(g.points.size() - 1);
  }
  return g;
}

double desired_speed(double t, double t_next, double remaining, double max_speed) {
  if (t >= t_next) return max_speed;
  return std::min(max_speed, std::max(0.0, remaining) / (t_next - t));
}

namespace {

std::size_t find_anchor(const GlobalTrajectory& g, Vec2 position, std::size_t hint, std::size_t window) {
  const std::size_t last = g.points.size() - 1;
  hint = std::min(hint, last);
  const std::size_t end = std::min(last, hint + window);
  std::size_t best = hint;
  double best_d = INFINITY;
  for (std::size_t i = hint; i <= end; ++i) {
    const double dx = g.points[i].x - position.x;
    const double dy = g.points[i].y - position.y;
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

LocalReference local_reference(const GlobalTrajectory& g, Vec2 position, std::size_t hint, double speed,
                               double max_speed, int n, std::size_t window, std::size_t stop_at) {
  LocalReference out;
  out.anchor = find_anchor(g, position, hint, window);
  out.speed = speed;
  const double ratio = max_speed > 0.0 ? std::clamp(speed / max_speed, 0.0, 1.0) : 0.0;
  const std::size_t last = std::min(g.points.size() - 1, stop_at);
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(out.anchor) + static_cast<double>(i + 1) * ratio;
    if (f >= static_cast<double>(last)) {
      out.points.push_back(g.points[last]);
      continue;
    }
    const auto lo = static_cast<std::size_t>(std::floor(f));
    const double frac = f - static_cast<double>(lo);
    const TrajPoint& a = g.points[lo];
    const TrajPoint& b = g.points[lo + 1];
    out.points.push_back({a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y), a.heading});
  }
  return out;
}

LocalPlanner::LocalPlanner(std::vector<ScheduleEntry> entries, std::vector<double> dwell,
                           const Scenario& scenario, VehicleIndex vehicle)
    : entries_(std::move(entries)),
      dwell_(std::move(dwell)),
      scenario_(&scenario),
      max_speed_(scenario.vehicle(vehicle).max_speed),
      nominal_speed_(scenario.vehicle(vehicle).nominal_speed),
      horizon_(scenario.mpc.horizon),
      global_(precompute_global(entries_, scenario.graph, max_speed_, scenario.mpc.dt,
                                scenario.vehicle(vehicle).parking)) {
  dwell_.resize(entries_.size(), 0.0);
}

Vec2 LocalPlanner::target_position() const {
  return scenario_->graph.node(entries_[std::min(target_, entries_.size() - 1)].node).position;
}

Vec2 LocalPlanner::terminal_position() const {
  return {global_.points.back().x, global_.points.back().y};
}

bool LocalPlanner::sharp_turn(std::size_t entry) const {
  const std::size_t m = global_.node_marks[entry];
  if (m == 0 || m + 1 >= global_.points.size()) return false;
  const double turn = std::remainder(global_.points[m].heading - global_.points[m - 1].heading, 2.0 * std::numbers::pi);
  return std::abs(turn) > kSharpTurn;
}

double LocalPlanner::departure_time(std::size_t reached) const {
  const double ready = *last_arrival_ + dwell_[reached];
  if (reached + 1 >= entries_.size()) return ready;
  double travel = 0.0;
  if (entries_[reached].node != entries_[reached + 1].node) {
    auto e = scenario_->graph.find_edge(entries_[reached].node, entries_[reached + 1].node);
    if (e) travel = scenario_->graph.edge(*e).length / nominal_speed_;
  }
  return std::max(ready, entries_[reached + 1].time - travel);
}

bool LocalPlanner::holding(double t) const {
  return target_ > 0 && last_arrival_ && t < departure_time(target_ - 1);
}

void LocalPlanner::arrive(double t) {
  if (all_arrived()) return;
  hint_ = std::max(hint_, global_.node_marks[target_]);
  ++target_;
  last_arrival_ = t;
}

PlannerStep LocalPlanner::step(double t, Vec2 position) {
  const PlannerParams& pp = scenario_->planner;
  const auto window = static_cast<std::size_t>(std::max(0, pp.anchor_window));
  PlannerStep out;
  out.target = target_;

  if (holding(t)) {
    out.holding = true;
    const std::size_t at = global_.node_marks[target_ - 1];
    out.reference.anchor = hint_;
    out.reference.speed = 0.0;
    out.reference.points.assign(static_cast<std::size_t>(horizon_), global_.points[at]);
    return out;
  }

  const std::size_t anchor = find_anchor(global_, position, hint_, window);
  hint_ = anchor;
  double speed = max_speed_;
  if (!all_arrived()) {
    const double remaining = global_.arc[global_.node_marks[target_]] - global_.arc[anchor];
    speed = desired_speed(t, entries_[target_].time, remaining, max_speed_);
    speed = std::max(speed, pp.speed_floor_ratio * max_speed_);
  }
  const double to_end = global_.arc.back() - global_.arc[anchor];
  if (pp.park_ramp_distance > 0.0 && to_end < pp.park_ramp_distance) {
    speed = std::min(speed, max_speed_ * to_end / pp.park_ramp_distance);
  }
  // Reversals are taken standing on the node, otherwise the robot cuts past it.
  std::size_t stop_at = global_.points.size();
  if (!all_arrived() && sharp_turn(target_)) stop_at = global_.node_marks[target_];
  out.reference = local_reference(global_, position, anchor, speed, max_speed_, horizon_, 0, stop_at);
  return out;
}

}  // namespace fleet
