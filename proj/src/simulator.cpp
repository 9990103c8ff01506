#include "fleet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

namespace fleet {

namespace {

struct Robot {
  VehicleIndex id{};
  LocalPlanner planner;
  RobotState state;
  Action last{};
  std::vector<Action> plan;
  std::vector<Vec2> broadcast;  // positions published at the previous step
  bool parked{false};
};

std::vector<double> dwell_for(const Scenario& sc, const RouteSet& routes, std::size_t r) {
  std::vector<double> out;
  for (const Visit& v : route_visits(sc, routes, r)) out.push_back(v.task ? sc.task(*v.task).dwell : 0.0);
  return out;
}

}  // namespace

SimLog run_simulation(const Scenario& sc, const Schedule& schedule, const RouteSet& routes) {
  SimLog log;
  const MpcParams& mp = sc.mpc;
  const double dt = mp.dt;
  const auto horizon = static_cast<std::size_t>(mp.horizon);
  log.dt = dt;

  std::vector<Robot> robots;
  double last_time = 0.0;
  for (std::size_t r = 0; r < routes.routes.size(); ++r) {
    const VehicleIndex v = routes.routes[r].vehicle;
    const auto& entries = schedule.per_vehicle[idx(v)];
    LocalPlanner planner(entries, dwell_for(sc, routes, r), sc, v);
    const TrajPoint start = planner.global().points.front();
    Robot robot{v, std::move(planner), {start.x, start.y, start.heading}, {}, {}, {}, false};
    robot.broadcast.assign(horizon, Vec2{start.x, start.y});
    last_time = std::max(last_time, entries.back().time);
    robots.push_back(std::move(robot));
  }
  std::sort(robots.begin(), robots.end(), [](const Robot& a, const Robot& b) { return a.id < b.id; });

  long max_steps = sc.sim.max_steps;
  if (max_steps <= 0) max_steps = static_cast<long>(std::ceil((1.5 * last_time + 300.0) / dt));

  // The start visit counts as reached at t = 0.
  for (Robot& rb : robots) {
    const auto& e = rb.planner.entries().front();
    log.arrivals.push_back({rb.id, e.node, 0, e.time, 0.0});
    rb.planner.arrive(0.0);
  }

  double reach = 0.0;
  for (const Vehicle& v : sc.vehicles) reach = std::max(reach, v.max_speed);
  reach = mp.d_fleet + 2.0 * reach * dt * static_cast<double>(horizon) + 1.0;

  std::vector<MpcSolution> solutions(robots.size());
  long step = 0;
  for (; step < max_steps; ++step) {
    const double t = static_cast<double>(step) * dt;

    // Arrivals and parking.
    for (Robot& rb : robots) {
      if (rb.parked) continue;
      const Vec2 pos{rb.state.x, rb.state.y};
      while (!rb.planner.all_arrived() && !rb.planner.holding(t) &&
             distance(pos, rb.planner.target_position()) <= sc.sim.r_node) {
        const std::size_t k = rb.planner.target();
        const auto& e = rb.planner.entries()[k];
        log.arrivals.push_back({rb.id, e.node, k, e.time, t});
        rb.planner.arrive(t);
      }
      if (rb.planner.all_arrived() && !rb.planner.holding(t) &&
          distance(pos, rb.planner.terminal_position()) <= sc.sim.r_node) {
        rb.parked = true;
      }
    }
    if (std::all_of(robots.begin(), robots.end(), [](const Robot& rb) { return rb.parked; })) {
      log.completed = true;
      break;
    }

    // Plan and control; every robot reads the previous step's broadcasts.
    for (std::size_t i = 0; i < robots.size(); ++i) {
      Robot& rb = robots[i];
      if (rb.parked) {
        rb.last = {};
        log.planner.push_back({step, rb.id, 0.0, 0, rb.planner.target(), false, true, true});
        continue;
      }
      const PlannerStep ps = rb.planner.step(t, {rb.state.x, rb.state.y});
      log.planner.push_back({step, rb.id, ps.reference.speed, ps.reference.anchor, ps.target, ps.holding, false,
                             rb.planner.all_arrived()});

      MpcProblem pr;
      pr.start = rb.state;
      pr.previous = rb.last;
      pr.reference = ps.reference.points;
      pr.reference_speed = ps.reference.speed;
      pr.obstacles = sc.obstacles;
      pr.params = mp;
      pr.max_speed = sc.vehicle(rb.id).max_speed;
      for (std::size_t j = 0; j < robots.size(); ++j) {
        if (j == i) continue;
        if (distance({rb.state.x, rb.state.y}, robots[j].broadcast.front()) > reach) continue;
        pr.neighbors.push_back({robots[j].id, robots[j].broadcast});
      }
      std::vector<Action> warm;
      if (!rb.plan.empty()) {
        warm.assign(rb.plan.begin() + 1, rb.plan.end());
        warm.push_back(rb.plan.back());
      }
      solutions[i] = solve_mpc(pr, warm);
      if (solutions[i].fallback) ++log.fallbacks;
    }

    // Integrate and publish.
    double min_sep = INFINITY;
    for (std::size_t i = 0; i < robots.size(); ++i) {
      Robot& rb = robots[i];
      Action a{};
      if (!rb.parked) {
        a = solutions[i].actions.front();
        rb.plan = solutions[i].actions;
      }
      log.trace.push_back({step, rb.id, rb.state, a});
      rb.state = motion_model(rb.state, a, dt);
      rb.last = a;
      if (rb.parked) {
        rb.broadcast.assign(horizon, Vec2{rb.state.x, rb.state.y});
      } else {
        // Shifted by one step when read next round; the last point repeats.
        std::vector<Vec2> next(solutions[i].positions.begin(), solutions[i].positions.end());
        next.erase(next.begin());
        next.push_back(next.empty() ? Vec2{rb.state.x, rb.state.y} : next.back());
        rb.broadcast = std::move(next);
      }
    }
    for (std::size_t i = 0; i < robots.size(); ++i) {
      for (std::size_t j = i + 1; j < robots.size(); ++j) {
        min_sep = std::min(min_sep, distance({robots[i].state.x, robots[i].state.y},
                                             {robots[j].state.x, robots[j].state.y}));
      }
    }
    log.min_separation.push_back(min_sep);
  }
  log.steps = step;
  if (!log.completed) spdlog::warn("simulation stopped at the step limit ({} steps)", max_steps);

  // Final states.
  for (const Robot& rb : robots) log.trace.push_back({step, rb.id, rb.state, Action{}});
  std::stable_sort(log.arrivals.begin(), log.arrivals.end(), [](const ArrivalEvent& a, const ArrivalEvent& b) {
    return a.vehicle != b.vehicle ? a.vehicle < b.vehicle : a.entry < b.entry;
  });
  return log;
}

AuditReport safety_audit(const SimLog& log, const Scenario& sc) {
  AuditReport out;
  std::map<long, std::vector<const TraceRow*>> by_step;
  for (const TraceRow& row : log.trace) by_step[row.step].push_back(&row);
  std::map<std::pair<long, std::size_t>, const PlannerTraceRow*> plan_of;
  for (const PlannerTraceRow& row : log.planner) plan_of[{row.step, idx(row.vehicle)}] = &row;

  struct Open {
    double start;
    double worst;
    double last;
  };
  std::map<std::pair<std::size_t, std::size_t>, Open> sep_open;
  std::map<std::size_t, Open> obs_open;
  auto close_sep = [&](std::pair<std::size_t, std::size_t> key) {
    auto it = sep_open.find(key);
    if (it == sep_open.end()) return;
    out.findings.push_back({"separation", make_index<VehicleIndex>(key.first), make_index<VehicleIndex>(key.second),
                            it->second.start, it->second.last, it->second.worst});
    sep_open.erase(it);
  };
  auto close_obs = [&](std::size_t v) {
    auto it = obs_open.find(v);
    if (it == obs_open.end()) return;
    out.findings.push_back({"obstacle", make_index<VehicleIndex>(v), std::nullopt, it->second.start, it->second.last,
                            it->second.worst});
    obs_open.erase(it);
  };

  // Deadlock tracking per vehicle.
  struct Still {
    bool active{false};
    double since{0.0};
    Vec2 anchor{};
  };
  std::vector<Still> still(sc.vehicles.size());
  auto close_still = [&](std::size_t v, double t) {
    if (still[v].active && t - still[v].since >= sc.sim.deadlock_window) {
      out.findings.push_back({"deadlock", make_index<VehicleIndex>(v), std::nullopt, still[v].since, t, t - still[v].since});
    }
    still[v].active = false;
  };

  double last_t = 0.0;
  for (const auto& [step, rows] : by_step) {
    const double t = static_cast<double>(step) * log.dt;
    last_t = t;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      const Vec2 pa{rows[a]->state.x, rows[a]->state.y};
      const std::size_t va = idx(rows[a]->vehicle);
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        const Vec2 pb{rows[b]->state.x, rows[b]->state.y};
        const std::size_t vb = idx(rows[b]->vehicle);
        const double d = distance(pa, pb);
        out.min_separation = std::min(out.min_separation, d);
        const auto key = std::minmax(va, vb);
        const double limit = sc.vehicles[va].footprint_radius + sc.vehicles[vb].footprint_radius;
        if (d < limit) {
          auto [it, fresh] = sep_open.try_emplace(key, Open{t, d, t});
          it->second.worst = std::min(it->second.worst, d);
          it->second.last = t;
        } else {
          close_sep(key);
        }
      }
      double worst = INFINITY;
      for (const Polygon& poly : sc.obstacles) {
        const Vec2 lo = poly.bbox_min(), hi = poly.bbox_max();
        const double margin = 5.0;
        if (pa.x < lo.x - margin || pa.x > hi.x + margin || pa.y < lo.y - margin || pa.y > hi.y + margin) continue;
        worst = std::min(worst, signed_distance(poly, pa).value);
      }
      out.min_obstacle_distance = std::min(out.min_obstacle_distance, worst);
      if (worst < 0.0) {
        auto [it, fresh] = obs_open.try_emplace(va, Open{t, worst, t});
        it->second.worst = std::min(it->second.worst, worst);
        it->second.last = t;
      } else {
        close_obs(va);
      }

      auto pit = plan_of.find({step, va});
      const PlannerTraceRow* pr = pit == plan_of.end() ? nullptr : pit->second;
      Still& s = still[va];
      if (!pr || pr->holding || pr->parked || pr->finishing) {
        close_still(va, t);
        continue;
      }
      if (!s.active) {
        s = {true, t, pa};
      } else if (distance(pa, s.anchor) > sc.sim.deadlock_epsilon) {
        close_still(va, t);
        s = {true, t, pa};
      }
    }
  }
  for (auto it = sep_open.begin(); it != sep_open.end();) close_sep((it++)->first);
  for (auto it = obs_open.begin(); it != obs_open.end();) close_obs((it++)->first);
  for (std::size_t v = 0; v < still.size(); ++v) close_still(v, last_t);
  return out;
}

}  // namespace fleet
