#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace fleet::testing {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

ScenarioBuilder::ScenarioBuilder(double horizon) {
  sc_.name = "test";
  sc_.horizon = horizon;
}

NodeIndex ScenarioBuilder::node(const std::string& id, double x, double y, NodeKind kind) {
  nodes_.push_back({id, {x, y}, kind});
  return make_index<NodeIndex>(nodes_.size() - 1);
}

void ScenarioBuilder::road(const std::string& a, const std::string& b, Capacity cap, std::optional<double> length) {
  auto find = [&](const std::string& id) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].id == id) return make_index<NodeIndex>(i);
    }
    throw std::invalid_argument("unknown node " + id);
  };
  const NodeIndex na = find(a), nb = find(b);
  const double len = length.value_or(distance(nodes_[idx(na)].position, nodes_[idx(nb)].position));
  edges_.push_back({na, nb, len, cap});
  edges_.push_back({nb, na, len, cap});
}

VehicleIndex ScenarioBuilder::vehicle(const std::string& id, const std::string& depot, std::vector<std::string> caps,
                                      double range) {
  Vehicle v;
  v.id = id;
  v.nominal_speed = 1.0;
  v.max_speed = 1.5;
  v.range = range;
  v.capabilities = std::move(caps);
  v.footprint_radius = 0.3;
  vehicles_.push_back({v, depot});
  return make_index<VehicleIndex>(vehicles_.size() - 1);
}

TaskIndex ScenarioBuilder::task(const std::string& id, const std::string& node, std::string capability,
                                std::optional<TimeWindow> window, std::vector<std::string> predecessors) {
  Task t;
  t.id = id;
  t.required_capability = std::move(capability);
  t.window = window.value_or(TimeWindow{0.0, sc_.horizon});
  tasks_.push_back({t, node, std::move(predecessors)});
  return make_index<TaskIndex>(tasks_.size() - 1);
}

Scenario ScenarioBuilder::build() const {
  Scenario sc = sc_;
  sc.graph = Graph(nodes_, edges_);
  auto node_of = [&](const std::string& id) {
    auto n = sc.graph.find_node(id);
    if (!n) throw std::invalid_argument("unknown node " + id);
    return *n;
  };
  sc.vehicles.clear();
  for (const auto& pv : vehicles_) {
    Vehicle v = pv.v;
    v.depot = node_of(pv.depot);
    sc.vehicles.push_back(v);
  }
  sc.tasks.clear();
  for (const auto& pt : tasks_) {
    Task t = pt.t;
    t.node = node_of(pt.node);
    sc.tasks.push_back(t);
  }
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    for (const std::string& p : tasks_[i].preds) {
      auto ti = sc.find_task(p);
      if (!ti) throw std::invalid_argument("unknown task " + p);
      sc.tasks[i].predecessors.push_back(*ti);
    }
  }
  return sc;
}

ScenarioBuilder grid_builder(int rows, int cols, double spacing, const std::vector<std::pair<int, int>>& depots,
                             double horizon) {
  ScenarioBuilder b(horizon);
  auto name = [](int r, int c) { return "G" + std::to_string(r) + std::to_string(c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool depot = std::find(depots.begin(), depots.end(), std::pair{r, c}) != depots.end();
      b.node(name(r, c), c * spacing, -r * spacing, depot ? NodeKind::depot : NodeKind::task_location);
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) b.road(name(r, c), name(r, c + 1));
      if (r + 1 < rows) b.road(name(r, c), name(r + 1, c));
    }
  }
  return b;
}

Graph random_graph(Rng& rng, std::size_t n, double chord_probability) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({"v" + std::to_string(i), {0.0, 0.0}, NodeKind::intersection});
  std::vector<Edge> edges;
  std::vector<std::size_t> ring(n);
  std::iota(ring.begin(), ring.end(), 0);
  std::shuffle(ring.begin(), ring.end(), rng);
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b || used[a][b]) return;
    used[a][b] = true;
    edges.push_back({make_index<NodeIndex>(a), make_index<NodeIndex>(b), static_cast<double>(pick(rng, 1, 20)),
                     Capacity::narrow});
  };
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) add(ring[i], ring[(i + 1) % n]);
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (chance(rng, chord_probability)) add(a, b);
    }
  }
  return Graph(std::move(nodes), std::move(edges));
}

std::vector<std::vector<double>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Edge& e : g.edges()) d[idx(e.from)][idx(e.to)] = std::min(d[idx(e.from)][idx(e.to)], e.length);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  return d;
}

bool difference_system_consistent(std::size_t variables, const std::vector<DiffConstraint>& constraints) {
  // x_to - x_from >= w  <=>  x_from - x_to <= -w: arc to -> from with weight -w.
  // x_i >= 0 = x_0 adds arc i -> 0 with weight 0.
  const std::size_t n = variables;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    if (i != 0) d[i][0] = std::min(d[i][0], 0.0);
  }
  for (const DiffConstraint& c : constraints) {
    const auto a = static_cast<std::size_t>(c.to), b = static_cast<std::size_t>(c.from);
    d[a][b] = std::min(d[a][b], -c.weight);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (d[k][j] == kInf) continue;
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i][i] < -1e-9) return false;
  }
  return true;
}

bool dtp_brute_force(const Dtp& dtp) {
  const std::size_t k = dtp.disjunctions().size();
  std::vector<DiffConstraint> cs = dtp.hard();
  const std::size_t base = cs.size();
  cs.resize(base + k);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) cs[base + i] = dtp.disjunctions()[i].options[(mask >> i) & 1U];
    if (difference_system_consistent(dtp.variable_count(), cs)) return true;
  }
  return false;
}

Dtp random_dtp(Rng& rng, std::size_t max_disjunctions) {
  Dtp dtp;
  const int vars = pick(rng, 2, 7);
  for (int i = 0; i < vars; ++i) dtp.add_variable("v" + std::to_string(i));
  const int n = vars + 1;
  auto var = [&] { return pick(rng, 0, n - 1); };
  auto constraint = [&] {
    int a = var(), b = var();
    while (b == a) b = var();
    return DiffConstraint{a, b, static_cast<double>(pick(rng, -15, 15))};
  };
  const int hard = pick(rng, 0, 2 * vars);
  for (int i = 0; i < hard; ++i) {
    const DiffConstraint c = constraint();
    dtp.require(c.from, c.to, c.weight);
  }
  // Keep the box finite so most instances are interesting.
  for (int i = 1; i < n; ++i) {
    if (chance(rng, 0.5)) dtp.require(i, Dtp::origin, -static_cast<double>(pick(rng, 5, 40)));
  }
  const int k = pick(rng, 0, static_cast<int>(max_disjunctions));
  for (int i = 0; i < k; ++i) dtp.add_disjunction(constraint(), constraint());
  return dtp;
}

namespace {

struct VehiclePlan {
  std::vector<std::size_t> stops;  // tasks; SIZE_MAX marks a depot visit
};

}  // namespace

RoutingOptimum exhaustive_routing(const Scenario& sc) {
  const auto dist = floyd_warshall(sc.graph);
  const std::size_t m = sc.tasks.size();
  const std::size_t V = sc.vehicles.size();
  constexpr std::size_t depot_mark = std::numeric_limits<std::size_t>::max();
  constexpr double eps = 1e-9;
  RoutingOptimum best;

  std::vector<std::size_t> owner(m, 0);
  std::function<void(std::size_t)> assign;
  std::vector<std::vector<VehiclePlan>> options(V);

  auto route_options = [&](std::size_t v, const std::vector<std::size_t>& tasks) {
    std::vector<VehiclePlan> out;
    std::vector<std::size_t> perm = tasks;
    std::sort(perm.begin(), perm.end());
    do {
      const std::size_t gaps = perm.empty() ? 0 : perm.size() - 1;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << gaps); ++mask) {
        VehiclePlan p;
        for (std::size_t i = 0; i < perm.size(); ++i) {
          if (i > 0 && ((mask >> (i - 1)) & 1U)) p.stops.push_back(depot_mark);
          p.stops.push_back(perm[i]);
        }
        // Range check per charge cycle.
        const Vehicle& veh = sc.vehicles[v];
        std::size_t at = idx(veh.depot);
        double since = 0.0;
        bool ok = true;
        for (std::size_t s : p.stops) {
          const std::size_t to = s == depot_mark ? idx(veh.depot) : idx(sc.tasks[s].node);
          since += dist[at][to];
          if (s == depot_mark) {
            if (since > veh.range + eps) ok = false;
            since = 0.0;
          }
          at = to;
        }
        since += dist[at][idx(veh.depot)];
        if (since > veh.range + eps) ok = false;
        if (ok) out.push_back(p);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  };

  auto plan_distance = [&](std::size_t v, const VehiclePlan& p) {
    const Vehicle& veh = sc.vehicles[v];
    std::size_t at = idx(veh.depot);
    double total = 0.0;
    for (std::size_t s : p.stops) {
      const std::size_t to = s == depot_mark ? idx(veh.depot) : idx(sc.tasks[s].node);
      total += dist[at][to];
      at = to;
    }
    return total + dist[at][idx(veh.depot)];
  };

  auto timing_ok = [&](const std::vector<const VehiclePlan*>& plans) {
    std::vector<double> service(m, 0.0);
    for (int pass = 0; pass < 1000; ++pass) {
      bool changed = false;
      for (std::size_t v = 0; v < V; ++v) {
        const Vehicle& veh = sc.vehicles[v];
        std::size_t at = idx(veh.depot);
        double t = 0.0;
        for (std::size_t s : plans[v]->stops) {
          const std::size_t to = s == depot_mark ? idx(veh.depot) : idx(sc.tasks[s].node);
          t += dist[at][to] / veh.nominal_speed;
          at = to;
          if (s == depot_mark) continue;
          const Task& task = sc.tasks[s];
          t = std::max(t, task.window.earliest);
          for (TaskIndex p : task.predecessors) t = std::max(t, service[idx(p)]);
          if (t > task.window.latest + eps) return false;
          if (t > service[s]) {
            service[s] = t;
            changed = true;
          }
        }
        t += dist[at][idx(veh.depot)] / veh.nominal_speed;
        if (t > sc.horizon + eps) return false;
      }
      if (!changed) return true;
    }
    return false;
  };

  assign = [&](std::size_t a) {
    if (a == m) {
      std::vector<std::vector<VehiclePlan>> per(V);
      for (std::size_t v = 0; v < V; ++v) {
        std::vector<std::size_t> mine;
        for (std::size_t t = 0; t < m; ++t) {
          if (owner[t] == v) mine.push_back(t);
        }
        per[v] = route_options(v, mine);
        if (per[v].empty()) return;
      }
      std::vector<std::size_t> pos(V, 0);
      while (true) {
        std::vector<const VehiclePlan*> plans;
        double total = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
          plans.push_back(&per[v][pos[v]]);
          total += plan_distance(v, per[v][pos[v]]);
        }
        if ((!best.feasible || total < best.distance - eps) && timing_ok(plans)) {
          best.feasible = true;
          best.distance = total;
        }
        std::size_t v = 0;
        while (v < V && ++pos[v] == per[v].size()) pos[v++] = 0;
        if (v == V) break;
      }
      return;
    }
    for (std::size_t v = 0; v < V; ++v) {
      if (!sc.vehicles[v].capable_of(sc.tasks[a])) continue;
      owner[a] = v;
      assign(a + 1);
    }
  };
  assign(0);
  return best;
}

Scenario random_routing_instance(Rng& rng) {
  const double T = std::vector<double>{80.0, 150.0, 300.0}[static_cast<std::size_t>(pick(rng, 0, 2))];
  ScenarioBuilder b(T);
  auto name = [](int r, int c) { return "G" + std::to_string(r) + std::to_string(c); };
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const bool depot = (r == 0 && c == 0) || (r == 2 && c == 2);
      b.node(name(r, c), c * 10.0, -r * 10.0, depot ? NodeKind::depot : NodeKind::task_location);
    }
  }
  const double extra[] = {0.0, 2.0, 5.0};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (c + 1 < 3) b.road(name(r, c), name(r, c + 1), Capacity::narrow, 10.0 + extra[pick(rng, 0, 2)]);
      if (r + 1 < 3) b.road(name(r, c), name(r + 1, c), Capacity::narrow, 10.0 + extra[pick(rng, 0, 2)]);
    }
  }
  const double ranges[] = {40.0, 60.0, 80.0, 1000.0};
  const char* caps[] = {"a", "b"};
  const int vehicles = pick(rng, 1, 2);
  for (int v = 0; v < vehicles; ++v) {
    std::vector<std::string> mine;
    for (const char* c : caps) {
      if (chance(rng, 0.7)) mine.emplace_back(c);
    }
    b.vehicle("V" + std::to_string(v), v == 0 ? "G00" : "G22", mine, ranges[pick(rng, 0, 3)]);
  }
  std::vector<std::string> spots = {"G01", "G02", "G10", "G11", "G12", "G20", "G21"};
  std::shuffle(spots.begin(), spots.end(), rng);
  const int tasks = pick(rng, 1, 4);
  const double opens[] = {0.0, 10.0, 20.0, 40.0};
  const double spans[] = {10.0, 30.0, 100.0, 1e9};
  for (int i = 0; i < tasks; ++i) {
    const int cap = pick(rng, 0, 3);
    const double open = std::min(opens[pick(rng, 0, 3)], T);
    const double close = std::min(open + spans[pick(rng, 0, 3)], T);
    std::vector<std::string> preds;
    for (int j = 0; j < i; ++j) {
      if (chance(rng, 0.2)) preds.push_back("t" + std::to_string(j));
    }
    b.task("t" + std::to_string(i), spots[static_cast<std::size_t>(i)], cap < 2 ? caps[cap] : "",
           TimeWindow{open, close}, preds);
  }
  return b.build();
}

Scenario random_scheduling_instance(Rng& rng) {
  const int rows = pick(rng, 2, 3), cols = pick(rng, 3, 4);
  std::vector<std::pair<int, int>> corners = {{0, 0}, {rows - 1, cols - 1}, {0, cols - 1}};
  const int vehicles = pick(rng, 2, 3);
  corners.resize(static_cast<std::size_t>(vehicles));
  const double T = 2000.0;
  ScenarioBuilder b(T);
  auto name = [](int r, int c) { return "G" + std::to_string(r) + std::to_string(c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const bool depot = std::find(corners.begin(), corners.end(), std::pair{r, c}) != corners.end();
      b.node(name(r, c), c * 10.0, -r * 10.0, depot ? NodeKind::depot : NodeKind::task_location);
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Capacity cap = chance(rng, 0.3) ? Capacity::wide : Capacity::narrow;
      if (c + 1 < cols) b.road(name(r, c), name(r, c + 1), cap);
      if (r + 1 < rows) b.road(name(r, c), name(r + 1, c), Capacity::narrow);
    }
  }
  for (int v = 0; v < vehicles; ++v) {
    const auto [r, c] = corners[static_cast<std::size_t>(v)];
    b.vehicle("V" + std::to_string(v), name(r, c));
  }
  std::vector<std::string> spots;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (std::find(corners.begin(), corners.end(), std::pair{r, c}) == corners.end()) spots.push_back(name(r, c));
    }
  }
  std::shuffle(spots.begin(), spots.end(), rng);
  const int tasks = std::min(pick(rng, 2, 5), static_cast<int>(spots.size()));
  for (int i = 0; i < tasks; ++i) {
    std::vector<std::string> preds;
    if (i > 0 && chance(rng, 0.25)) preds.push_back("t" + std::to_string(i - 1));
    b.task("t" + std::to_string(i), spots[static_cast<std::size_t>(i)], {}, std::nullopt, preds);
  }
  Scenario sc = b.build();
  sc.mu = 20.0;
  return sc;
}

MpcProblem random_mpc_problem(Rng& rng, std::vector<Polygon>& storage) {
  MpcProblem pr;
  pr.params = MpcParams{};
  pr.params.horizon = 20;
  pr.max_speed = 1.5;
  const double heading = uniform(rng, -3.0, 3.0);
  const double speed = uniform(rng, 0.3, 1.4);
  const Vec2 dir{std::cos(heading), std::sin(heading)};
  const Vec2 side{-dir.y, dir.x};
  const Vec2 origin{uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0)};
  pr.start = {origin.x + uniform(rng, -0.3, 0.3), origin.y + uniform(rng, -0.3, 0.3),
              wrap_angle(heading + uniform(rng, -0.4, 0.4))};
  pr.previous = {uniform(rng, 0.2, 1.2), uniform(rng, -0.3, 0.3)};
  pr.reference_speed = speed;
  const auto n = static_cast<std::size_t>(pr.params.horizon);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 p = origin + (static_cast<double>(k + 1) * speed * pr.params.dt) * dir;
    pr.reference.push_back({p.x, p.y, heading});
  }
  // A square beside the path, close enough for the inflation band to bite.
  const double gap = uniform(rng, 0.1, 0.45);
  const Vec2 c = origin + (uniform(rng, 0.5, 2.0)) * dir + (gap + 0.5) * side;
  storage = {Polygon({c + Vec2{-0.5, -0.5}, c + Vec2{0.5, -0.5}, c + Vec2{0.5, 0.5}, c + Vec2{-0.5, 0.5}})};
  pr.obstacles = storage;
  NeighborPlan nb;
  nb.vehicle = make_index<VehicleIndex>(1);
  const double lateral = uniform(rng, -0.9, 0.9);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 p = origin + (static_cast<double>(k + 1) * speed * pr.params.dt) * dir + (-lateral) * side +
                   uniform(rng, -0.05, 0.05) * dir;
    nb.positions.push_back(p);
  }
  pr.neighbors.push_back(nb);
  return pr;
}

std::vector<Action> random_actions(Rng& rng, const MpcProblem& pr) {
  std::vector<Action> u(pr.reference.size());
  for (Action& a : u) a = {uniform(rng, 0.3, 1.4), uniform(rng, -0.5, 0.5)};
  project_actions(u, pr.previous, pr.params, pr.max_speed);
  return u;
}

double gradient_relative_error(const MpcProblem& pr, const std::vector<Action>& u, double h) {
  std::vector<Action> g;
  mpc_cost(pr, u, &g);
  double worst = 0.0, scale = 1e-6;
  std::vector<Action> w = u;
  for (std::size_t k = 0; k < u.size(); ++k) {
    for (int c = 0; c < 2; ++c) {
      double& x = c == 0 ? w[k].v : w[k].omega;
      const double x0 = x;
      x = x0 + h;
      const double up = mpc_cost(pr, w);
      x = x0 - h;
      const double down = mpc_cost(pr, w);
      x = x0;
      const double fd = (up - down) / (2.0 * h);
      const double an = c == 0 ? g[k].v : g[k].omega;
      worst = std::max(worst, std::abs(fd - an));
      scale = std::max(scale, std::abs(fd));
    }
  }
  return worst / scale;
}

bool actions_within_bounds(const std::vector<Action>& u, const Action& previous, const MpcParams& p,
                           double max_speed) {
  Action prev = previous;
  const double vmax = std::min(p.u_max[0], max_speed);
  for (const Action& a : u) {
    if (a.v < p.u_min[0] || a.v > vmax || a.omega < p.u_min[1] || a.omega > p.u_max[1]) return false;
    if (a.v < prev.v + p.du_min[0] * p.dt || a.v > prev.v + p.du_max[0] * p.dt) return false;
    if (a.omega < prev.omega + p.du_min[1] * p.dt || a.omega > prev.omega + p.du_max[1] * p.dt) return false;
    prev = a;
  }
  return true;
}

double square_signed_distance(Vec2 lo, Vec2 hi, Vec2 p, int samples) {
  const Vec2 corners[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
  double best = kInf;
  for (int s = 0; s < 4; ++s) {
    const Vec2 a = corners[s], b = corners[(s + 1) % 4];
    auto at = [&](double f) { return distance(p, a + f * (b - a)); };
    int best_i = 0;
    double best_side = kInf;
    for (int i = 0; i <= samples; ++i) {
      const double d = at(static_cast<double>(i) / samples);
      if (d < best_side) {
        best_side = d;
        best_i = i;
      }
    }
    double l = std::max(0.0, (best_i - 1.0) / samples), r = std::min(1.0, (best_i + 1.0) / samples);
    for (int it = 0; it < 200; ++it) {
      const double m1 = l + (r - l) / 3.0, m2 = r - (r - l) / 3.0;
      if (at(m1) <= at(m2)) {
        r = m2;
      } else {
        l = m1;
      }
    }
    best = std::min({best, best_side, at(0.5 * (l + r))});
  }
  const bool inside = p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y;
  return inside ? -best : best;
}

}  // namespace fleet::testing
