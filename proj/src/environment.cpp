#include "fleet/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fleet {

using nlohmann::json;

bool Vehicle::capable_of(const Task& task) const {
  return task.required_capability.empty() ||
         std::find(capabilities.begin(), capabilities.end(), task.required_capability) !=
             capabilities.end();
}

Graph::Graph(std::vector<Node> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), out_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    by_name_.emplace(nodes_[i].id, make_index<NodeIndex>(i));
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto e = make_index<EdgeIndex>(i);
    out_[idx(edges_[i].from)].push_back(e);
    by_ends_.emplace(key(edges_[i].from, edges_[i].to), e);
  }
}

std::optional<NodeIndex> Graph::find_node(const std::string& id) const {
  auto it = by_name_.find(id);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> Graph::find_edge(NodeIndex from, NodeIndex to) const {
  auto it = by_ends_.find(key(from, to));
  if (it == by_ends_.end()) return std::nullopt;
  return it->second;
}

EdgeIndex Graph::inverse_edge(EdgeIndex e) const {
  if (idx(e) >= edges_.size()) throw std::out_of_range("unknown edge");
  const Edge& ed = edges_[idx(e)];
  auto inv = find_edge(ed.to, ed.from);
  if (!inv) throw std::out_of_range("edge has no inverse");
  return *inv;
}

bool Graph::strongly_connected() const {
  if (nodes_.empty()) return true;
  std::vector<std::vector<std::size_t>> fwd(nodes_.size()), rev(nodes_.size());
  for (const Edge& e : edges_) {
    fwd[idx(e.from)].push_back(idx(e.to));
    rev[idx(e.to)].push_back(idx(e.from));
  }
  auto reaches_all = [&](const std::vector<std::vector<std::size_t>>& adj) {
    std::vector<bool> seen(adj.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == adj.size();
  };
  return reaches_all(fwd) && reaches_all(rev);
}

std::optional<TaskIndex> Scenario::find_task(const std::string& id) const {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].id == id) return make_index<TaskIndex>(i);
  }
  return std::nullopt;
}

std::optional<VehicleIndex> Scenario::find_vehicle(const std::string& id) const {
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (vehicles[i].id == id) return make_index<VehicleIndex>(i);
  }
  return std::nullopt;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::depot: return "depot";
    case NodeKind::task_location: return "task-location";
    case NodeKind::intersection: return "intersection";
  }
  return "?";
}

std::string_view to_string(Capacity capacity) {
  return capacity == Capacity::narrow ? "narrow" : "wide";
}

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw ScenarioError(ScenarioError::Kind::parse, what);
}

[[noreturn]] void invalid(const std::string& what) {
  throw ScenarioError(ScenarioError::Kind::validation, what);
}

void only_keys(const json& obj, std::initializer_list<std::string_view> allowed,
               std::string_view where) {
  if (!obj.is_object()) parse_fail(std::string(where) + ": expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      parse_fail(std::string(where) + ": unknown field '" + item.key() + "'");
    }
  }
}

const json& required(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(std::string(where) + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& value, std::string_view where) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string(where) + ": " + e.what());
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, std::string_view where) {
  if (auto it = obj.find(key); it != obj.end()) out = get_as<T>(*it, std::string(where) + "." + key);
}

Vec2 read_point(const json& value, std::string_view where) {
  auto xy = get_as<std::vector<double>>(value, where);
  if (xy.size() != 2) parse_fail(std::string(where) + ": expected [x, y]");
  return {xy[0], xy[1]};
}

NodeKind parse_kind(const std::string& s, std::string_view where) {
  if (s == "depot") return NodeKind::depot;
  if (s == "task-location") return NodeKind::task_location;
  if (s == "intersection") return NodeKind::intersection;
  parse_fail(std::string(where) + ": unknown node kind '" + s + "'");
}

Capacity parse_capacity(const std::string& s, std::string_view where) {
  if (s == "narrow") return Capacity::narrow;
  if (s == "wide") return Capacity::wide;
  parse_fail(std::string(where) + ": unknown capacity '" + s + "'");
}

void read_params(const json& p, Scenario& sc, bool& horizon_given) {
  only_keys(p, {"T", "mu", "dt", "N", "d_fleet", "mpc", "planner", "sim", "scheduler"}, "params");
  if (p.contains("T")) {
    sc.horizon = get_as<double>(p["T"], "params.T");
    horizon_given = true;
  }
  read_opt(p, "mu", sc.mu, "params");
  read_opt(p, "dt", sc.mpc.dt, "params");
  read_opt(p, "N", sc.mpc.horizon, "params");
  read_opt(p, "d_fleet", sc.mpc.d_fleet, "params");
  if (auto it = p.find("mpc"); it != p.end()) {
    const json& m = *it;
    only_keys(m, {"q_state", "q_action", "q_rate", "q_fleet", "u_min", "u_max", "du_min", "du_max",
                  "obstacle_weight", "obstacle_inflation", "tolerance", "max_iterations"},
              "params.mpc");
    read_opt(m, "q_state", sc.mpc.q_state, "params.mpc");
    read_opt(m, "q_action", sc.mpc.q_action, "params.mpc");
    read_opt(m, "q_rate", sc.mpc.q_rate, "params.mpc");
    read_opt(m, "q_fleet", sc.mpc.q_fleet, "params.mpc");
    read_opt(m, "u_min", sc.mpc.u_min, "params.mpc");
    read_opt(m, "u_max", sc.mpc.u_max, "params.mpc");
    read_opt(m, "du_min", sc.mpc.du_min, "params.mpc");
    read_opt(m, "du_max", sc.mpc.du_max, "params.mpc");
    read_opt(m, "obstacle_weight", sc.mpc.obstacle_weight, "params.mpc");
    read_opt(m, "obstacle_inflation", sc.mpc.obstacle_inflation, "params.mpc");
    read_opt(m, "tolerance", sc.mpc.tolerance, "params.mpc");
    read_opt(m, "max_iterations", sc.mpc.max_iterations, "params.mpc");
  }
  if (auto it = p.find("planner"); it != p.end()) {
    only_keys(*it, {"speed_floor_ratio", "anchor_window", "park_ramp_distance"}, "params.planner");
    read_opt(*it, "speed_floor_ratio", sc.planner.speed_floor_ratio, "params.planner");
    read_opt(*it, "anchor_window", sc.planner.anchor_window, "params.planner");
    read_opt(*it, "park_ramp_distance", sc.planner.park_ramp_distance, "params.planner");
  }
  if (auto it = p.find("sim"); it != p.end()) {
    only_keys(*it, {"r_node", "max_steps", "deadlock_window", "deadlock_epsilon"}, "params.sim");
    read_opt(*it, "r_node", sc.sim.r_node, "params.sim");
    read_opt(*it, "max_steps", sc.sim.max_steps, "params.sim");
    read_opt(*it, "deadlock_window", sc.sim.deadlock_window, "params.sim");
    read_opt(*it, "deadlock_epsilon", sc.sim.deadlock_epsilon, "params.sim");
  }
  if (auto it = p.find("scheduler"); it != p.end()) {
    only_keys(*it, {"k_paths", "max_iterations", "dtp_node_budget", "wide_edges"}, "params.scheduler");
    read_opt(*it, "k_paths", sc.scheduler.k_paths, "params.scheduler");
    read_opt(*it, "max_iterations", sc.scheduler.max_iterations, "params.scheduler");
    read_opt(*it, "dtp_node_budget", sc.scheduler.dtp_node_budget, "params.scheduler");
    if (it->contains("wide_edges")) {
      const auto w = get_as<std::string>((*it)["wide_edges"], "params.scheduler.wide_edges");
      if (w == "tie") sc.scheduler.wide_edges = WideEdgePolicy::tie_only;
      else if (w == "full") sc.scheduler.wide_edges = WideEdgePolicy::full;
      else parse_fail("params.scheduler.wide_edges: expected 'tie' or 'full'");
    }
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("malformed scenario document: ") + e.what());
  }
  only_keys(doc, {"name", "note", "nodes", "edges", "tasks", "vehicles", "obstacles", "params"},
            "scenario");

  Scenario sc;
  read_opt(doc, "name", sc.name, "scenario");
  read_opt(doc, "note", sc.note, "scenario");

  bool horizon_given = false;
  read_params(required(doc, "params", "scenario"), sc, horizon_given);
  if (!horizon_given) parse_fail("params: missing field 'T'");

  std::vector<Node> nodes;
  std::unordered_map<std::string, std::size_t> node_ids;
  for (const json& n : get_as<json::array_t>(required(doc, "nodes", "scenario"), "nodes")) {
    only_keys(n, {"id", "x", "y", "kind"}, "node");
    Node node;
    node.id = get_as<std::string>(required(n, "id", "node"), "node.id");
    node.position = {get_as<double>(required(n, "x", "node"), "node.x"),
                     get_as<double>(required(n, "y", "node"), "node.y")};
    node.kind = parse_kind(get_as<std::string>(required(n, "kind", "node"), "node.kind"), node.id);
    if (!node_ids.emplace(node.id, nodes.size()).second) invalid("duplicate node id '" + node.id + "'");
    nodes.push_back(std::move(node));
  }
  auto node_ref = [&](const json& v, std::string_view where) {
    const auto id = get_as<std::string>(v, where);
    auto it = node_ids.find(id);
    if (it == node_ids.end()) invalid(std::string(where) + ": unknown node '" + id + "'");
    return make_index<NodeIndex>(it->second);
  };

  std::vector<Edge> edges;
  for (const json& e : get_as<json::array_t>(required(doc, "edges", "scenario"), "edges")) {
    only_keys(e, {"from", "to", "length", "capacity"}, "edge");
    Edge edge;
    edge.from = node_ref(required(e, "from", "edge"), "edge.from");
    edge.to = node_ref(required(e, "to", "edge"), "edge.to");
    edge.length = get_as<double>(required(e, "length", "edge"), "edge.length");
    edge.capacity = parse_capacity(get_as<std::string>(required(e, "capacity", "edge"), "edge.capacity"),
                                   "edge.capacity");
    edges.push_back(edge);
  }
  sc.graph = Graph(std::move(nodes), std::move(edges));

  std::vector<std::pair<std::string, std::vector<std::string>>> pending_preds;
  if (auto it = doc.find("tasks"); it != doc.end()) {
    for (const json& t : get_as<json::array_t>(*it, "tasks")) {
      only_keys(t, {"id", "node", "window", "predecessors", "capability", "dwell"}, "task");
      Task task;
      task.id = get_as<std::string>(required(t, "id", "task"), "task.id");
      task.node = node_ref(required(t, "node", "task"), "task " + task.id);
      task.window = {0.0, sc.horizon};
      if (t.contains("window")) {
        auto w = get_as<std::vector<double>>(t["window"], "task.window");
        if (w.size() != 2) parse_fail("task " + task.id + ": window must be [earliest, latest]");
        task.window = {w[0], w[1]};
      }
      read_opt(t, "capability", task.required_capability, "task");
      read_opt(t, "dwell", task.dwell, "task");
      std::vector<std::string> preds;
      read_opt(t, "predecessors", preds, "task");
      pending_preds.emplace_back(task.id, std::move(preds));
      sc.tasks.push_back(std::move(task));
    }
  }
  for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
    for (const auto& p : pending_preds[i].second) {
      auto pi = sc.find_task(p);
      if (!pi) invalid("task " + sc.tasks[i].id + ": unknown predecessor '" + p + "'");
      sc.tasks[i].predecessors.push_back(*pi);
    }
  }

  for (const json& v : get_as<json::array_t>(required(doc, "vehicles", "scenario"), "vehicles")) {
    only_keys(v, {"id", "depot", "nominal_speed", "max_speed", "range", "capabilities",
                  "footprint_radius", "parking"},
              "vehicle");
    Vehicle veh;
    veh.id = get_as<std::string>(required(v, "id", "vehicle"), "vehicle.id");
    veh.depot = node_ref(required(v, "depot", "vehicle"), "vehicle " + veh.id);
    veh.nominal_speed = get_as<double>(required(v, "nominal_speed", "vehicle"), "vehicle.nominal_speed");
    veh.max_speed = get_as<double>(required(v, "max_speed", "vehicle"), "vehicle.max_speed");
    veh.range = get_as<double>(required(v, "range", "vehicle"), "vehicle.range");
    read_opt(v, "capabilities", veh.capabilities, "vehicle");
    read_opt(v, "footprint_radius", veh.footprint_radius, "vehicle");
    if (v.contains("parking")) veh.parking = read_point(v["parking"], "vehicle.parking");
    sc.vehicles.push_back(std::move(veh));
  }

  if (auto it = doc.find("obstacles"); it != doc.end()) {
    for (const json& o : get_as<json::array_t>(*it, "obstacles")) {
      std::vector<Vec2> verts;
      for (const json& p : get_as<json::array_t>(o, "obstacle")) verts.push_back(read_point(p, "obstacle vertex"));
      sc.obstacles.emplace_back(std::move(verts));
    }
  }

  validate(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ScenarioError::Kind::io, "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void validate(const Scenario& sc) {
  const Graph& g = sc.graph;
  if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon)) invalid("horizon T must be positive");
  if (!(sc.mu >= 0.0)) invalid("safety margin mu must be non-negative");
  if (!(sc.mpc.dt > 0.0)) invalid("dt must be positive");
  if (sc.mpc.horizon < 2) invalid("MPC horizon N must be at least 2");
  if (g.node_count() == 0) invalid("graph has no nodes");

  for (const Node& n : g.nodes()) {
    if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
      invalid("node " + n.id + ": position not finite");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen_edges;
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edges()[i];
    const auto name = g.node(e.from).id + "->" + g.node(e.to).id;
    if (e.from == e.to) invalid("edge " + name + ": self loop");
    if (!seen_edges.emplace(idx(e.from), idx(e.to)).second) invalid("duplicate edge " + name);
    if (!(e.length > 0.0) || !std::isfinite(e.length)) invalid("edge " + name + ": length must be positive");
    const double euclid = distance(g.node(e.from).position, g.node(e.to).position);
    if (e.length < euclid * (1.0 - 1e-9)) invalid("edge " + name + ": length shorter than node distance");
    auto inv = g.find_edge(e.to, e.from);
    if (!inv) invalid("missing inverse edge for " + name);
    const Edge& r = g.edge(*inv);
    if (r.length != e.length || r.capacity != e.capacity) {
      invalid("edge " + name + ": inverse edge differs in length or capacity");
    }
  }
  if (!g.strongly_connected()) invalid("graph is not strongly connected (unreachable node)");

  std::set<std::string> task_ids;
  for (const Task& t : sc.tasks) {
    if (!task_ids.insert(t.id).second) invalid("duplicate task id '" + t.id + "'");
    if (g.node(t.node).kind == NodeKind::depot) invalid("task " + t.id + ": located at a depot node");
    if (!(0.0 <= t.window.earliest && t.window.earliest <= t.window.latest &&
          t.window.latest <= sc.horizon)) {
      invalid("task " + t.id + ": time window outside [0, T] or empty");
    }
    if (!(t.dwell >= 0.0)) invalid("task " + t.id + ": negative dwell");
  }
  // Precedence must be acyclic (Kahn).
  {
    std::vector<int> indegree(sc.tasks.size(), 0);
    std::vector<std::vector<std::size_t>> succ(sc.tasks.size());
    for (std::size_t i = 0; i < sc.tasks.size(); ++i) {
      for (TaskIndex p : sc.tasks[i].predecessors) {
        succ[idx(p)].push_back(i);
        ++indegree[i];
      }
    }
    std::queue<std::size_t> ready;
    for (std::size_t i = 0; i < indegree.size(); ++i) {
      if (indegree[i] == 0) ready.push(i);
    }
    std::size_t done = 0;
    while (!ready.empty()) {
      const std::size_t u = ready.front();
      ready.pop();
      ++done;
      for (std::size_t v : succ[u]) {
        if (--indegree[v] == 0) ready.push(v);
      }
    }
    if (done != sc.tasks.size()) invalid("cyclic precedence among tasks");
  }

  std::set<std::string> vehicle_ids;
  double max_footprint = 0.0;
  for (const Vehicle& v : sc.vehicles) {
    if (!vehicle_ids.insert(v.id).second) invalid("duplicate vehicle id '" + v.id + "'");
    if (g.node(v.depot).kind != NodeKind::depot) invalid("vehicle " + v.id + ": depot node is not a depot");
    if (!(v.nominal_speed > 0.0)) invalid("vehicle " + v.id + ": nominal speed must be positive");
    if (!(v.max_speed >= v.nominal_speed)) invalid("vehicle " + v.id + ": max speed below nominal speed");
    if (!(v.range > 0.0)) invalid("vehicle " + v.id + ": range must be positive");
    if (!(v.footprint_radius > 0.0)) invalid("vehicle " + v.id + ": footprint radius must be positive");
    if (v.parking && (!std::isfinite(v.parking->x) || !std::isfinite(v.parking->y))) {
      invalid("vehicle " + v.id + ": parking position not finite");
    }
    max_footprint = std::max(max_footprint, v.footprint_radius);
  }
  if (sc.vehicles.empty()) invalid("scenario has no vehicles");
  if (!(sc.mpc.d_fleet > 2.0 * max_footprint)) invalid("d_fleet must exceed twice the footprint radius");

  for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
    const Polygon& p = sc.obstacles[i];
    const auto name = "obstacle " + std::to_string(i);
    if (p.size() < 3) invalid(name + ": fewer than 3 vertices");
    for (const Vec2& v : p.vertices()) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) invalid(name + ": vertex not finite");
    }
    if (!is_simple(p)) invalid(name + ": self-intersecting");
    if (!(signed_area(p) > 0.0)) invalid(name + ": not counter-clockwise");
  }
}

std::string serialize_scenario(const Scenario& sc) {
  json doc;
  doc["name"] = sc.name;
  if (!sc.note.empty()) doc["note"] = sc.note;
  const Graph& g = sc.graph;
  json nodes = json::array();
  for (const Node& n : g.nodes()) {
    nodes.push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}, {"kind", to_string(n.kind)}});
  }
  doc["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const Edge& e : g.edges()) {
    edges.push_back({{"from", g.node(e.from).id},
                     {"to", g.node(e.to).id},
                     {"length", e.length},
                     {"capacity", to_string(e.capacity)}});
  }
  doc["edges"] = std::move(edges);
  json tasks = json::array();
  for (const Task& t : sc.tasks) {
    json preds = json::array();
    for (TaskIndex p : t.predecessors) preds.push_back(sc.task(p).id);
    json jt{{"id", t.id},
            {"node", g.node(t.node).id},
            {"window", {t.window.earliest, t.window.latest}},
            {"predecessors", std::move(preds)}};
    if (!t.required_capability.empty()) jt["capability"] = t.required_capability;
    if (t.dwell != 0.0) jt["dwell"] = t.dwell;
    tasks.push_back(std::move(jt));
  }
  doc["tasks"] = std::move(tasks);
  json vehicles = json::array();
  for (const Vehicle& v : sc.vehicles) {
    json jv{{"id", v.id},
            {"depot", g.node(v.depot).id},
            {"nominal_speed", v.nominal_speed},
            {"max_speed", v.max_speed},
            {"range", v.range},
            {"capabilities", v.capabilities},
            {"footprint_radius", v.footprint_radius}};
    if (v.parking) jv["parking"] = {v.parking->x, v.parking->y};
    vehicles.push_back(std::move(jv));
  }
  doc["vehicles"] = std::move(vehicles);
  json obstacles = json::array();
  for (const Polygon& p : sc.obstacles) {
    json verts = json::array();
    for (const Vec2& v : p.vertices()) verts.push_back({v.x, v.y});
    obstacles.push_back(std::move(verts));
  }
  doc["obstacles"] = std::move(obstacles);

  const MpcParams& m = sc.mpc;
  doc["params"] = {
      {"T", sc.horizon},
      {"mu", sc.mu},
      {"dt", m.dt},
      {"N", m.horizon},
      {"d_fleet", m.d_fleet},
      {"mpc",
       {{"q_state", m.q_state},
        {"q_action", m.q_action},
        {"q_rate", m.q_rate},
        {"q_fleet", m.q_fleet},
        {"u_min", m.u_min},
        {"u_max", m.u_max},
        {"du_min", m.du_min},
        {"du_max", m.du_max},
        {"obstacle_weight", m.obstacle_weight},
        {"obstacle_inflation", m.obstacle_inflation},
        {"tolerance", m.tolerance},
        {"max_iterations", m.max_iterations}}},
      {"planner",
       {{"speed_floor_ratio", sc.planner.speed_floor_ratio},
        {"anchor_window", sc.planner.anchor_window},
        {"park_ramp_distance", sc.planner.park_ramp_distance}}},
      {"sim",
       {{"r_node", sc.sim.r_node},
        {"max_steps", sc.sim.max_steps},
        {"deadlock_window", sc.sim.deadlock_window},
        {"deadlock_epsilon", sc.sim.deadlock_epsilon}}},
      {"scheduler",
       {{"k_paths", sc.scheduler.k_paths},
        {"max_iterations", sc.scheduler.max_iterations},
        {"dtp_node_budget", sc.scheduler.dtp_node_budget},
        {"wide_edges", sc.scheduler.wide_edges == WideEdgePolicy::full ? "full" : "tie"}}}};
  return doc.dump(2);
}

}  // namespace fleet
