#include "fleet/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

namespace fleet {

std::vector<Visit> route_visits(const Scenario& scenario, const RouteSet& routes, std::size_t r) {
  const Route& route = routes.routes[r];
  const auto& legs = routes.legs[r];
  std::vector<Visit> out;
  out.push_back(Visit{route.stops.front().node, std::nullopt, route.stops.front().task, true});
  for (std::size_t k = 0; k < legs.size(); ++k) {
    const auto& nodes = legs[k].nodes;
    const auto& next = route.stops[k + 1];
    if (nodes.size() <= 1) {
      out.push_back(Visit{next.node, std::nullopt, next.task, false});
      continue;
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      auto e = scenario.graph.find_edge(nodes[i - 1], nodes[i]);
      if (!e) throw std::invalid_argument("route leg uses a non-existent edge");
      const bool last = i + 1 == nodes.size();
      out.push_back(Visit{nodes[i], e, last ? next.task : std::nullopt, false});
    }
  }
  out.back().terminal = true;
  return out;
}

std::size_t departure_visit(const std::vector<Visit>& visits, std::size_t i) {
  for (std::size_t j = i + 1; j < visits.size(); ++j) {
    if (visits[j].in_edge) return j;
  }
  return visits.size() - 1;
}

double node_clearance(double mu, double in_travel) { return std::max(mu - in_travel, 0.5 * mu); }

namespace {

struct Occurrence {
  std::size_t route;
  std::size_t visit;
};

double travel_time(const Scenario& sc, const Route& route, EdgeIndex e) {
  return sc.graph.edge(e).length / sc.vehicle(route.vehicle).nominal_speed;
}

struct Pending {
  double key;
  std::size_t seq;
  Disjunction d;
};

}  // namespace

CapacityProblem build_capacity_problem(const RouteSet& routes, const Scenario& sc) {
  CapacityProblem p;
  Dtp& dtp = p.dtp;
  const std::size_t R = routes.routes.size();
  p.visits.resize(R);
  p.arrival.resize(R);
  p.entry.resize(R);

  std::map<std::size_t, int> task_var;
  for (std::size_t r = 0; r < R; ++r) {
    const Route& route = routes.routes[r];
    const std::string& vid = sc.vehicle(route.vehicle).id;
    p.visits[r] = route_visits(sc, routes, r);
    const auto& visits = p.visits[r];
    for (std::size_t i = 0; i < visits.size(); ++i) {
      const std::string& nid = sc.graph.node(visits[i].node).id;
      const int x = dtp.add_variable(fmt::format("x[{},{},{}]", vid, i, nid));
      int y = -1;
      p.arrival[r].push_back(x);
      dtp.require(x, Dtp::origin, -sc.horizon);
      if (i == 0) {
        dtp.require(x, Dtp::origin, 0.0);
      } else if (visits[i].in_edge) {
        y = dtp.add_variable(fmt::format("y[{},{},{}]", vid, i, nid));
        const double tau = travel_time(sc, route, *visits[i].in_edge);
        dtp.require(y, Dtp::origin, -sc.horizon);
        dtp.require(p.arrival[r][i - 1], y, 0.0);
        dtp.require(y, x, tau);
        dtp.require(x, y, -tau);
      } else {
        dtp.require(p.arrival[r][i - 1], x, 0.0);
      }
      p.entry[r].push_back(y);
      if (visits[i].task) {
        const Task& task = sc.task(*visits[i].task);
        dtp.require(Dtp::origin, x, task.window.earliest);
        dtp.require(x, Dtp::origin, -task.window.latest);
        task_var[idx(*visits[i].task)] = x;
      }
    }
  }
  for (const auto& [a, x] : task_var) {
    for (TaskIndex pred : sc.tasks[a].predecessors) {
      auto it = task_var.find(idx(pred));
      if (it != task_var.end()) dtp.require(it->second, x, 0.0);
    }
  }

  // Nominal (disjunction-free) least solution orders the disjunctions.
  std::vector<double> nominal = solve_difference_constraints(dtp.variable_count(), dtp.hard());
  if (nominal.empty()) nominal.assign(dtp.variable_count(), 0.0);

  std::map<std::size_t, std::vector<Occurrence>> at_node;
  std::map<std::size_t, std::vector<Occurrence>> on_edge;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < p.visits[r].size(); ++i) {
      const Visit& v = p.visits[r][i];
      if (!v.in_edge) continue;
      on_edge[idx(*v.in_edge)].push_back({r, i});
      if (!v.terminal) at_node[idx(v.node)].push_back({r, i});
    }
  }

  std::vector<Pending> pending;
  auto push = [&](DiffConstraint first, DiffConstraint second, Family family, double t1, double t2) {
    pending.push_back({std::min(t1, t2), pending.size(), Disjunction{{first, second}, family}});
  };
  // a goes first when nominally earlier (ties: lower route index).
  auto earlier = [&](int va, int vb) { return nominal[va] <= nominal[vb]; };

  const double mu = sc.mu;
  for (const auto& [n, occ] : at_node) {
    for (std::size_t a = 0; a < occ.size(); ++a) {
      for (std::size_t b = a + 1; b < occ.size(); ++b) {
        const auto& A = occ[a];
        const auto& B = occ[b];
        if (A.route == B.route) continue;
        const int xa = p.arrival[A.route][A.visit];
        const int xb = p.arrival[B.route][B.visit];
        const auto leave = [&](const Occurrence& o) {
          const std::size_t j = departure_visit(p.visits[o.route], o.visit);
          return p.visits[o.route][j].in_edge ? p.entry[o.route][j] : p.arrival[o.route][j];
        };
        const auto clearance = [&](const Occurrence& o) {
          return node_clearance(mu, travel_time(sc, routes.routes[o.route], *p.visits[o.route][o.visit].in_edge));
        };
        const DiffConstraint b_later{leave(A), xb, clearance(A)};
        const DiffConstraint a_later{leave(B), xa, clearance(B)};
        if (earlier(xa, xb)) {
          push(b_later, a_later, Family::node_exclusion, nominal[xa], nominal[xb]);
        } else {
          push(a_later, b_later, Family::node_exclusion, nominal[xa], nominal[xb]);
        }
      }
    }
  }
  const bool full = sc.scheduler.wide_edges == WideEdgePolicy::full;
  for (const auto& [e, occ] : on_edge) {
    const Edge& edge = sc.graph.edge(make_index<EdgeIndex>(e));
    if (edge.capacity == Capacity::wide && !full) continue;
    for (std::size_t a = 0; a < occ.size(); ++a) {
      for (std::size_t b = a + 1; b < occ.size(); ++b) {
        const auto& A = occ[a];
        const auto& B = occ[b];
        if (A.route == B.route) continue;
        const int ya = p.entry[A.route][A.visit], yb = p.entry[B.route][B.visit];
        const DiffConstraint b_later{ya, yb, mu};
        const DiffConstraint a_later{yb, ya, mu};
        if (earlier(ya, yb)) {
          push(b_later, a_later, Family::same_edge, nominal[ya], nominal[yb]);
        } else {
          push(a_later, b_later, Family::same_edge, nominal[ya], nominal[yb]);
        }
      }
    }
  }
  for (const auto& [e, occ] : on_edge) {
    const EdgeIndex ei = make_index<EdgeIndex>(e);
    if (sc.graph.edge(ei).capacity == Capacity::wide) continue;
    const EdgeIndex inv = sc.graph.inverse_edge(ei);
    if (idx(inv) < e) continue;
    auto it = on_edge.find(idx(inv));
    if (it == on_edge.end()) continue;
    for (const auto& A : occ) {
      for (const auto& B : it->second) {
        if (A.route == B.route) continue;
        const int ya = p.entry[A.route][A.visit], yb = p.entry[B.route][B.visit];
        const double clear_a = travel_time(sc, routes.routes[A.route], ei) + mu;
        const double clear_b = travel_time(sc, routes.routes[B.route], inv) + mu;
        const DiffConstraint b_later{ya, yb, clear_a};
        const DiffConstraint a_later{yb, ya, clear_b};
        if (earlier(ya, yb)) {
          push(b_later, a_later, Family::head_on, nominal[ya], nominal[yb]);
        } else {
          push(a_later, b_later, Family::head_on, nominal[ya], nominal[yb]);
        }
      }
    }
  }

  std::stable_sort(pending.begin(), pending.end(),
                   [](const Pending& a, const Pending& b) { return a.key < b.key; });
  for (const Pending& d : pending) dtp.disjunctions().push_back(d.d);
  return p;
}

Schedule extract_schedule(const CapacityProblem& problem, const std::vector<double>& values,
                          const RouteSet& routes) {
  Schedule s;
  s.per_vehicle.resize(routes.routes.size());
  for (std::size_t r = 0; r < routes.routes.size(); ++r) {
    const VehicleIndex v = routes.routes[r].vehicle;
    auto& entries = s.per_vehicle[idx(v)];
    for (std::size_t i = 0; i < problem.visits[r].size(); ++i) {
      entries.push_back({v, problem.visits[r][i].node, values[problem.arrival[r][i]]});
    }
  }
  return s;
}

CapacityResult verify_capacity(const RouteSet& routes, const Scenario& sc) {
  CapacityResult out;
  CapacityProblem problem = build_capacity_problem(routes, sc);
  std::set<std::pair<int, int>> separated;
  for (;;) {
    const DtpSolution sol = solve_dtp(problem.dtp, sc.scheduler.dtp_node_budget);
    out.nodes += sol.nodes;
    out.disjunctions = problem.dtp.disjunctions().size();
    if (sol.status != DtpStatus::feasible) {
      out.status = sol.status;
      return out;
    }
    std::size_t added = 0;
    if (sc.scheduler.wide_edges == WideEdgePolicy::tie_only) {
      std::map<std::size_t, std::vector<Occurrence>> on_wide;
      for (std::size_t r = 0; r < problem.visits.size(); ++r) {
        for (std::size_t i = 0; i < problem.visits[r].size(); ++i) {
          const auto& e = problem.visits[r][i].in_edge;
          if (e && sc.graph.edge(*e).capacity == Capacity::wide) on_wide[idx(*e)].push_back({r, i});
        }
      }
      for (const auto& [e, occ] : on_wide) {
        for (std::size_t a = 0; a < occ.size(); ++a) {
          for (std::size_t b = a + 1; b < occ.size(); ++b) {
            if (occ[a].route == occ[b].route) continue;
            int ya = problem.entry[occ[a].route][occ[a].visit];
            int yb = problem.entry[occ[b].route][occ[b].visit];
            if (std::abs(sol.values[ya] - sol.values[yb]) > 1e-6) continue;
            if (!separated.insert({std::min(ya, yb), std::max(ya, yb)}).second) continue;
            const auto& ida = sc.vehicle(routes.routes[occ[a].route].vehicle).id;
            const auto& idb = sc.vehicle(routes.routes[occ[b].route].vehicle).id;
            if (ida > idb) std::swap(ya, yb);  // ya: lower id, goes first
            problem.dtp.add_disjunction({ya, yb, sc.mu}, {yb, ya, sc.mu}, Family::wide_tie);
            ++added;
          }
        }
      }
    }
    if (added == 0) {
      out.status = DtpStatus::feasible;
      out.schedule = extract_schedule(problem, sol.values, routes);
      return out;
    }
  }
}

ConflictReport verify_schedule(const Schedule& schedule, const RouteSet& routes, const Scenario& sc,
                               double tol) {
  ConflictReport report;
  auto flag = [&](std::string family, std::string detail, double magnitude) {
    report.violations.push_back({std::move(family), std::move(detail), magnitude});
  };
  const std::size_t R = routes.routes.size();
  if (schedule.per_vehicle.size() != sc.vehicles.size() || R != sc.vehicles.size()) {
    flag("structure", "schedule does not cover every vehicle exactly once", 0.0);
    return report;
  }
  std::vector<std::vector<Visit>> visits(R);
  std::vector<std::vector<double>> t(R), y(R);
  for (std::size_t r = 0; r < R; ++r) {
    visits[r] = route_visits(sc, routes, r);
    const auto& entries = schedule.per_vehicle[idx(routes.routes[r].vehicle)];
    const std::string& vid = sc.vehicle(routes.routes[r].vehicle).id;
    if (entries.size() != visits[r].size()) {
      flag("structure", fmt::format("{}: {} entries for {} route nodes", vid, entries.size(), visits[r].size()), 0.0);
      return report;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].node != visits[r][i].node || entries[i].vehicle != routes.routes[r].vehicle) {
        flag("structure", fmt::format("{}: entry {} does not match the route's node sequence", vid, i), 0.0);
        return report;
      }
      t[r].push_back(entries[i].time);
    }
  }

  auto node_name = [&](NodeIndex n) { return sc.graph.node(n).id; };
  auto vname = [&](std::size_t r) { return sc.vehicle(routes.routes[r].vehicle).id; };

  std::map<std::size_t, double> task_time;
  for (std::size_t r = 0; r < R; ++r) {
    const double speed = sc.vehicle(routes.routes[r].vehicle).nominal_speed;
    y[r].assign(t[r].size(), 0.0);
    for (std::size_t i = 0; i < t[r].size(); ++i) {
      const Visit& v = visits[r][i];
      const double ti = t[r][i];
      if (!std::isfinite(ti) || ti < -tol || ti > sc.horizon + tol) {
        flag("horizon", fmt::format("{} at {} time {:.6f} outside [0, {}]", vname(r), node_name(v.node), ti, sc.horizon),
             ti < 0 ? -ti : ti - sc.horizon);
      }
      if (i > 0) {
        const double need = v.in_edge ? sc.graph.edge(*v.in_edge).length / speed : 0.0;
        const double gap = ti - t[r][i - 1];
        if (gap < need - tol) {
          flag("chaining", fmt::format("{} reaches {} {:.6f}s too early", vname(r), node_name(v.node), need - gap),
               need - gap);
        }
        y[r][i] = ti - need;
      }
      if (v.task) {
        const Task& task = sc.task(*v.task);
        task_time[idx(*v.task)] = ti;
        if (ti < task.window.earliest - tol || ti > task.window.latest + tol) {
          flag("window", fmt::format("{} serves {} at {:.6f} outside [{}, {}]", vname(r), task.id, ti,
                                     task.window.earliest, task.window.latest),
               std::max(task.window.earliest - ti, ti - task.window.latest));
        }
      }
    }
  }
  for (std::size_t a = 0; a < sc.tasks.size(); ++a) {
    auto it = task_time.find(a);
    if (it == task_time.end()) {
      flag("structure", "task " + sc.tasks[a].id + " is not served", 0.0);
      continue;
    }
    for (TaskIndex p : sc.tasks[a].predecessors) {
      auto jt = task_time.find(idx(p));
      if (jt != task_time.end() && it->second < jt->second - tol) {
        flag("precedence", sc.tasks[a].id + " served before " + sc.task(p).id, jt->second - it->second);
      }
    }
  }

  const double mu = sc.mu;
  const bool full = sc.scheduler.wide_edges == WideEdgePolicy::full;
  auto leave = [&](std::size_t r, std::size_t i) {
    const std::size_t k = departure_visit(visits[r], i);
    return visits[r][k].in_edge ? y[r][k] : t[r][k];
  };
  auto clearance = [&](std::size_t r, std::size_t i) {
    const double speed = sc.vehicle(routes.routes[r].vehicle).nominal_speed;
    return node_clearance(mu, sc.graph.edge(*visits[r][i].in_edge).length / speed);
  };
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t q = r + 1; q < R; ++q) {
      for (std::size_t i = 1; i < visits[r].size(); ++i) {
        const Visit& a = visits[r][i];
        if (!a.in_edge) continue;
        for (std::size_t j = 1; j < visits[q].size(); ++j) {
          const Visit& b = visits[q][j];
          if (!b.in_edge) continue;
          if (a.node == b.node && !a.terminal && !b.terminal) {
            // Node exclusion: one arrives at least mu after the other entered its incoming edge.
            const double short1 = y[r][i] + mu - t[q][j];
            const double short2 = y[q][j] + mu - t[r][i];
            const double shortfall = std::min(short1, short2);
            const std::string what =
                fmt::format("{} and {} at {} ({:.3f}s, {:.3f}s)", vname(r), vname(q), node_name(a.node), t[r][i], t[q][j]);
            if (shortfall > tol) flag("node-exclusion", what, shortfall);
            // Stronger form used by the scheduler: counted from when the other left.
            const double late1 = leave(r, i) + clearance(r, i) - t[q][j];
            const double late2 = leave(q, j) + clearance(q, j) - t[r][i];
            const double late = std::min(late1, late2);
            if (late > tol) flag("node-clearance", what, late);
          }
          const Edge& ea = sc.graph.edge(*a.in_edge);
          if (*a.in_edge == *b.in_edge) {
            const std::string where = node_name(ea.from) + "->" + node_name(ea.to);
            const double gap = std::abs(y[r][i] - y[q][j]);
            if (ea.capacity == Capacity::narrow || full) {
              if (gap < mu - tol) {
                flag("same-edge", fmt::format("{} and {} enter {} {:.3f}s apart", vname(r), vname(q), where, gap), mu - gap);
              }
            } else if (gap <= tol) {
              flag("same-edge", fmt::format("{} and {} enter wide {} simultaneously", vname(r), vname(q), where), 0.0);
            }
          } else if (ea.capacity == Capacity::narrow && ea.from == sc.graph.edge(*b.in_edge).to &&
                     ea.to == sc.graph.edge(*b.in_edge).from) {
            const double clear_a = ea.length / sc.vehicle(routes.routes[r].vehicle).nominal_speed + mu;
            const double clear_b = sc.graph.edge(*b.in_edge).length / sc.vehicle(routes.routes[q].vehicle).nominal_speed + mu;
            const double short1 = y[r][i] + clear_a - y[q][j];
            const double short2 = y[q][j] + clear_b - y[r][i];
            const double shortfall = std::min(short1, short2);
            if (shortfall > tol) {
              flag("head-on",
                   fmt::format("{} and {} on {}<->{}", vname(r), vname(q), node_name(ea.from), node_name(ea.to)),
                   shortfall);
            }
          }
        }
      }
    }
  }
  return report;
}

}  // namespace fleet
