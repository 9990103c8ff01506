#include "fleet/routing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <limits>
#include <numeric>
#include <queue>

namespace fleet {

std::vector<EdgeIndex> edge_sequence(const Graph& graph, const Path& path) {
  std::vector<EdgeIndex> out;
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    auto e = graph.find_edge(path.nodes[i - 1], path.nodes[i]);
    if (!e) throw std::invalid_argument("path uses a non-existent edge");
    out.push_back(*e);
  }
  return out;
}

double path_length(const Graph& graph, std::span<const NodeIndex> nodes) {
  double len = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    auto e = graph.find_edge(nodes[i - 1], nodes[i]);
    if (!e) throw std::invalid_argument("path uses a non-existent edge");
    len += graph.edge(*e).length;
  }
  return len;
}

bool is_valid_path(const Graph& graph, const Path& path) {
  if (path.nodes.empty()) return false;
  std::vector<bool> seen(graph.node_count(), false);
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (idx(path.nodes[i]) >= graph.node_count() || seen[idx(path.nodes[i])]) return false;
    seen[idx(path.nodes[i])] = true;
    if (i > 0 && !graph.find_edge(path.nodes[i - 1], path.nodes[i])) return false;
  }
  return true;
}

ShortestPathTree::ShortestPathTree(const Graph& graph, NodeIndex source)
    : source_(source),
      dist_(graph.node_count(), std::numeric_limits<double>::infinity()),
      parent_(graph.node_count()) {
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  std::vector<bool> done(graph.node_count(), false);
  dist_[idx(source)] = 0.0;
  open.emplace(0.0, idx(source));
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    for (EdgeIndex e : graph.out_edges(make_index<NodeIndex>(u))) {
      const Edge& edge = graph.edge(e);
      const std::size_t v = idx(edge.to);
      const double nd = d + edge.length;
      if (nd < dist_[v]) {
        dist_[v] = nd;
        parent_[v] = make_index<NodeIndex>(u);
        open.emplace(nd, v);
      }
    }
  }
}

Path ShortestPathTree::path_to(NodeIndex target) const {
  Path p;
  p.length = dist_[idx(target)];
  if (!std::isfinite(p.length)) throw std::runtime_error("target unreachable");
  for (std::optional<NodeIndex> n = target; n; n = parent_[idx(*n)]) {
    p.nodes.push_back(*n);
    if (*n == source_) break;
  }
  std::reverse(p.nodes.begin(), p.nodes.end());
  return p;
}

PathTable::PathTable(std::vector<NodeIndex> endpoints, std::vector<std::vector<Path>> paths)
    : endpoints_(std::move(endpoints)), paths_(std::move(paths)) {
  std::size_t max_node = 0;
  for (NodeIndex n : endpoints_) max_node = std::max(max_node, idx(n));
  slot_of_node_.assign(endpoints_.empty() ? 0 : max_node + 1, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < endpoints_.size(); ++i) slot_of_node_[idx(endpoints_[i])] = i;
}

bool PathTable::contains(NodeIndex n) const {
  return idx(n) < slot_of_node_.size() && slot_of_node_[idx(n)] != std::numeric_limits<std::size_t>::max();
}

std::size_t PathTable::slot(NodeIndex n) const {
  if (!contains(n)) throw std::out_of_range("node is not a path-table endpoint");
  return slot_of_node_[idx(n)];
}

const Path& PathTable::path(NodeIndex from, NodeIndex to) const {
  return paths_[slot(from)][slot(to)];
}

PathTable all_pairs_shortest_paths(const Graph& graph, std::span<const NodeIndex> endpoints) {
  std::vector<NodeIndex> eps(endpoints.begin(), endpoints.end());
  std::vector<std::vector<Path>> paths(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ShortestPathTree tree(graph, eps[i]);
    paths[i].reserve(eps.size());
    for (NodeIndex to : eps) paths[i].push_back(tree.path_to(to));
  }
  return PathTable(std::move(eps), std::move(paths));
}

std::vector<NodeIndex> routing_endpoints(const Scenario& scenario) {
  std::vector<NodeIndex> out;
  for (const Task& t : scenario.tasks) out.push_back(t.node);
  for (const Vehicle& v : scenario.vehicles) out.push_back(v.depot);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double RouteSet::total_distance() const {
  double total = 0.0;
  for (const auto& route_legs : legs) {
    for (const Path& p : route_legs) total += p.length;
  }
  return total;
}

RouteKey route_key(const RouteSet& routes) {
  RouteKey key;
  for (const Route& r : routes.routes) {
    std::vector<int> seq;
    for (std::size_t k = 1; k + 1 < r.stops.size(); ++k) {
      seq.push_back(r.stops[k].task ? static_cast<int>(idx(*r.stops[k].task)) : -1);
    }
    key.push_back(std::move(seq));
  }
  return key;
}

std::string_view to_string(RoutingFailure f) {
  switch (f) {
    case RoutingFailure::no_capable_vehicle: return "no capable vehicle";
    case RoutingFailure::time_window_unreachable: return "time window unreachable";
    case RoutingFailure::range_insufficient: return "range insufficient";
    case RoutingFailure::precedence_conflict: return "precedence conflicts with time windows";
    case RoutingFailure::no_joint_solution: return "no joint assignment satisfies all constraints";
    case RoutingFailure::alternatives_exhausted: return "all route sets exhausted";
  }
  return "?";
}

std::vector<double> nominal_times(const Route& route, std::span<const Path> legs, double speed) {
  std::vector<double> times;
  times.reserve(route.stops.size());
  double t = 0.0;
  for (std::size_t k = 0; k < route.stops.size(); ++k) {
    if (k > 0) t += legs[k - 1].length / speed;
    times.push_back(t);
  }
  return times;
}

RouteSet make_route_set(const Scenario& scenario, const PathTable& table, std::vector<Route> routes) {
  (void)scenario;
  RouteSet out;
  out.routes = std::move(routes);
  for (const Route& r : out.routes) {
    std::vector<Path> legs;
    for (std::size_t k = 1; k < r.stops.size(); ++k) {
      legs.push_back(table.path(r.stops[k - 1].node, r.stops[k].node));
    }
    out.legs.push_back(std::move(legs));
  }
  return out;
}

namespace {

constexpr double kEps = 1e-9;

class BranchAndBound {
public:
  BranchAndBound(const Scenario& sc, const PathTable& table, const std::set<RouteKey>& excluded)
      : sc_(sc), table_(table), excluded_(excluded) {
    order_.resize(sc.vehicles.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return sc.vehicles[a].id < sc.vehicles[b].id;
    });
    position_of_vehicle_.resize(order_.size());
    for (std::size_t p = 0; p < order_.size(); ++p) position_of_vehicle_[order_[p]] = p;

    const std::size_t m = sc.tasks.size();
    min_entry_.assign(m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < m; ++b) {
        if (b != a) best = std::min(best, dist(sc.tasks[b].node, sc.tasks[a].node));
      }
      for (const Vehicle& v : sc.vehicles) {
        if (v.capable_of(sc.tasks[a])) best = std::min(best, dist(v.depot, sc.tasks[a].node));
      }
      min_entry_[a] = std::isfinite(best) ? best : 0.0;
    }
    vehicle_of_task_.assign(m, -1);
    service_.assign(m, 0.0);
    routes_.resize(sc.vehicles.size());
  }

  RoutingResult run() {
    if (auto failure = precheck()) return *failure;
    start_vehicle(0);
    if (!best_) {
      if (hit_excluded_) {
        return RoutingInfeasible{RoutingFailure::alternatives_exhausted, std::nullopt,
                                 "routing infeasible: every feasible route set has been excluded"};
      }
      return RoutingInfeasible{RoutingFailure::no_joint_solution, std::nullopt,
                               "routing infeasible: no joint assignment satisfies all constraints"};
    }
    return make_route_set(sc_, table_, *best_);
  }

private:
  double dist(NodeIndex a, NodeIndex b) const { return table_.length(a, b); }

  std::optional<RoutingInfeasible> precheck() const {
    for (std::size_t a = 0; a < sc_.tasks.size(); ++a) {
      const Task& task = sc_.tasks[a];
      const auto ti = make_index<TaskIndex>(a);
      bool capable = false, in_range = false, in_time = false;
      for (const Vehicle& v : sc_.vehicles) {
        if (!v.capable_of(task)) continue;
        capable = true;
        const double out = dist(v.depot, task.node);
        const double back = dist(task.node, v.depot);
        if (out + back <= v.range + kEps) in_range = true;
        const double arrive = std::max(out / v.nominal_speed, task.window.earliest);
        if (arrive <= task.window.latest + kEps && arrive + back / v.nominal_speed <= sc_.horizon + kEps) {
          in_time = true;
        }
      }
      if (!capable) {
        return RoutingInfeasible{RoutingFailure::no_capable_vehicle, ti,
                                 "routing infeasible: no capable vehicle for task " + task.id};
      }
      if (!in_range) {
        return RoutingInfeasible{RoutingFailure::range_insufficient, ti,
                                 "routing infeasible: range insufficient for task " + task.id};
      }
      if (!in_time) {
        return RoutingInfeasible{RoutingFailure::time_window_unreachable, ti,
                                 "routing infeasible: time window unreachable for task " + task.id};
      }
      for (TaskIndex p : task.predecessors) {
        if (sc_.task(p).window.earliest > task.window.latest + kEps) {
          return RoutingInfeasible{RoutingFailure::precedence_conflict, ti,
                                   "routing infeasible: task " + task.id + " must follow " +
                                       sc_.task(p).id + " whose window opens after it closes"};
        }
      }
    }
    return std::nullopt;
  }

  bool later_vehicle_capable(std::size_t vpos, std::size_t task) const {
    for (std::size_t p = vpos + 1; p < order_.size(); ++p) {
      if (sc_.vehicles[order_[p]].capable_of(sc_.tasks[task])) return true;
    }
    return false;
  }

  double lower_bound() const {
    double lb = total_;
    for (std::size_t a = 0; a < sc_.tasks.size(); ++a) {
      if (vehicle_of_task_[a] < 0) lb += min_entry_[a];
    }
    return lb;
  }

  void start_vehicle(std::size_t vpos) {
    const std::size_t v = order_[vpos];
    routes_[v].vehicle = make_index<VehicleIndex>(v);
    routes_[v].stops = {Stop{std::nullopt, sc_.vehicles[v].depot}};
    extend(vpos, 0.0, 0.0);
  }

  void extend(std::size_t vpos, double time, double since_charge) {
    if (best_ && lower_bound() >= best_total_ - kEps) return;
    const std::size_t v = order_[vpos];
    const Vehicle& veh = sc_.vehicles[v];
    Route& route = routes_[v];
    const NodeIndex cur = route.stops.back().node;
    const bool at_depot = !route.stops.back().task.has_value();

    for (std::size_t a = 0; a < sc_.tasks.size(); ++a) {
      if (vehicle_of_task_[a] >= 0) continue;
      const Task& task = sc_.tasks[a];
      if (!veh.capable_of(task)) continue;

      double pred_time = 0.0;
      bool blocked = false;
      for (TaskIndex p : task.predecessors) {
        if (vehicle_of_task_[idx(p)] >= 0) {
          pred_time = std::max(pred_time, service_[idx(p)]);
        } else if (!later_vehicle_capable(vpos, idx(p))) {
          blocked = true;
        }
      }
      if (blocked) continue;

      const double back = dist(task.node, veh.depot);
      for (int recharge = 0; recharge < 2; ++recharge) {
        if (recharge && at_depot) continue;
        double leg, since, arrive;
        if (recharge) {
          const double home = dist(cur, veh.depot);
          if (since_charge + home > veh.range + kEps) continue;
          const double out = dist(veh.depot, task.node);
          leg = home + out;
          since = out;
          arrive = time + home / veh.nominal_speed + out / veh.nominal_speed;
        } else {
          leg = dist(cur, task.node);
          since = since_charge + leg;
          arrive = time + leg / veh.nominal_speed;
        }
        if (since + back > veh.range + kEps) continue;
        const double service = std::max({arrive, task.window.earliest, pred_time});
        if (service > task.window.latest + kEps) continue;
        if (service + back / veh.nominal_speed > sc_.horizon + kEps) continue;

        if (recharge) route.stops.push_back(Stop{std::nullopt, veh.depot});
        route.stops.push_back(Stop{make_index<TaskIndex>(a), task.node});
        vehicle_of_task_[a] = static_cast<int>(v);
        service_[a] = service;
        total_ += leg;

        extend(vpos, service, since);

        total_ -= leg;
        vehicle_of_task_[a] = -1;
        route.stops.pop_back();
        if (recharge) route.stops.pop_back();
      }
    }

    // Close this vehicle's route.
    const double home = dist(cur, veh.depot);
    if (since_charge + home > veh.range + kEps) return;
    if (time + home / veh.nominal_speed > sc_.horizon + kEps) return;
    route.stops.push_back(Stop{std::nullopt, veh.depot});
    total_ += home;
    if (vpos + 1 < order_.size()) {
      bool coverable = true;
      for (std::size_t a = 0; a < sc_.tasks.size(); ++a) {
        if (vehicle_of_task_[a] < 0 && !later_vehicle_capable(vpos, a)) coverable = false;
      }
      if (coverable) start_vehicle(vpos + 1);
    } else if (std::all_of(vehicle_of_task_.begin(), vehicle_of_task_.end(), [](int x) { return x >= 0; })) {
      leaf();
    }
    total_ -= home;
    route.stops.pop_back();
  }

  /// Exact nominal timing with cross-vehicle precedence waits.
  bool timing_feasible() const {
    const std::size_t m = sc_.tasks.size();
    std::vector<double> s(m, 0.0);
    std::vector<std::size_t> position(m, 0);
    for (const Route& r : routes_) {
      for (std::size_t k = 0; k < r.stops.size(); ++k) {
        if (r.stops[k].task) position[idx(*r.stops[k].task)] = k;
      }
    }
    for (std::size_t a = 0; a < m; ++a) {
      for (TaskIndex p : sc_.tasks[a].predecessors) {
        if (vehicle_of_task_[idx(p)] == vehicle_of_task_[a] && position[idx(p)] > position[a]) return false;
      }
    }
    const std::size_t max_passes = 4 * (m + 2);
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
      bool changed = false;
      for (const Route& r : routes_) {
        const Vehicle& veh = sc_.vehicle(r.vehicle);
        double t = 0.0;
        for (std::size_t k = 1; k < r.stops.size(); ++k) {
          t += dist(r.stops[k - 1].node, r.stops[k].node) / veh.nominal_speed;
          if (!r.stops[k].task) continue;
          const std::size_t a = idx(*r.stops[k].task);
          const Task& task = sc_.tasks[a];
          t = std::max(t, task.window.earliest);
          for (TaskIndex p : task.predecessors) t = std::max(t, s[idx(p)]);
          if (t > task.window.latest + kEps) return false;
          if (t != s[a]) {
            s[a] = t;
            changed = true;
          }
        }
        if (t > sc_.horizon + kEps) return false;
      }
      if (!changed) return true;
    }
    return false;
  }

  void leaf() {
    if (best_ && total_ >= best_total_ - kEps) return;
    if (!timing_feasible()) return;
    if (!excluded_.empty()) {
      RouteKey key;
      for (const Route& r : routes_) {
        std::vector<int> seq;
        for (std::size_t k = 1; k + 1 < r.stops.size(); ++k) {
          seq.push_back(r.stops[k].task ? static_cast<int>(idx(*r.stops[k].task)) : -1);
        }
        key.push_back(std::move(seq));
      }
      if (excluded_.count(key)) {
        hit_excluded_ = true;
        return;
      }
    }
    best_ = routes_;
    best_total_ = total_;
  }

  const Scenario& sc_;
  const PathTable& table_;
  const std::set<RouteKey>& excluded_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_of_vehicle_;
  std::vector<double> min_entry_;
  std::vector<int> vehicle_of_task_;
  std::vector<double> service_;
  std::vector<Route> routes_;
  double total_{0.0};
  std::optional<std::vector<Route>> best_;
  double best_total_{0.0};
  bool hit_excluded_{false};
};

}  // namespace

RoutingResult plan_routes(const Scenario& scenario, const PathTable& table,
                          const std::set<RouteKey>& excluded) {
  return BranchAndBound(scenario, table, excluded).run();
}

}  // namespace fleet
