#include "fleet/schedule_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace fleet {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError(fmt::format("line {}: bad number '{}'", line, s));
  return v;
}

}  // namespace

std::string schedule_to_csv(const Schedule& schedule, const Scenario& sc) {
  std::string out = "vehicle,node,time_s\n";
  for (const auto& entries : schedule.per_vehicle) {
    for (const ScheduleEntry& e : entries) {
      out += fmt::format("{},{},{:.9f}\n", sc.vehicle(e.vehicle).id, sc.graph.node(e.node).id, e.time);
    }
  }
  return out;
}

Schedule schedule_from_csv(const std::string& text, const Scenario& sc) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "vehicle,node,time_s") throw FormatError("missing schedule header");
  Schedule s;
  s.per_vehicle.resize(sc.vehicles.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw FormatError(fmt::format("line {}: expected 3 fields", lineno));
    auto v = sc.find_vehicle(f[0]);
    auto n = sc.graph.find_node(f[1]);
    if (!v) throw FormatError(fmt::format("line {}: unknown vehicle '{}'", lineno, f[0]));
    if (!n) throw FormatError(fmt::format("line {}: unknown node '{}'", lineno, f[1]));
    s.per_vehicle[idx(*v)].push_back({*v, *n, parse_double(f[2], lineno)});
  }
  return s;
}

std::string routes_to_json(const RouteSet& routes, const Scenario& sc) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["total_distance"] = routes.total_distance();
  ordered_json list = ordered_json::array();
  for (std::size_t r = 0; r < routes.routes.size(); ++r) {
    const Route& route = routes.routes[r];
    ordered_json jr;
    jr["vehicle"] = sc.vehicle(route.vehicle).id;
    ordered_json stops = ordered_json::array();
    for (const Stop& s : route.stops) {
      ordered_json js;
      js["node"] = sc.graph.node(s.node).id;
      js["task"] = s.task ? ordered_json(sc.task(*s.task).id) : ordered_json(nullptr);
      stops.push_back(js);
    }
    jr["stops"] = stops;
    ordered_json legs = ordered_json::array();
    for (const Path& p : routes.legs[r]) {
      ordered_json nodes = ordered_json::array();
      for (NodeIndex n : p.nodes) nodes.push_back(sc.graph.node(n).id);
      legs.push_back({{"length", p.length}, {"nodes", nodes}});
    }
    jr["legs"] = legs;
    list.push_back(jr);
  }
  doc["routes"] = list;
  return doc.dump(2) + "\n";
}

RouteSet routes_from_json(const std::string& text, const Scenario& sc) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("routes document: ") + e.what());
  }
  try {
    RouteSet out;
    std::vector<std::optional<Route>> by_vehicle(sc.vehicles.size());
    std::vector<std::vector<Path>> legs_by_vehicle(sc.vehicles.size());
    for (const auto& jr : doc.at("routes")) {
      auto v = sc.find_vehicle(jr.at("vehicle").get<std::string>());
      if (!v) throw FormatError("unknown vehicle in routes document");
      Route route{*v, {}};
      for (const auto& js : jr.at("stops")) {
        auto n = sc.graph.find_node(js.at("node").get<std::string>());
        if (!n) throw FormatError("unknown node in routes document");
        std::optional<TaskIndex> task;
        if (!js.at("task").is_null()) {
          task = sc.find_task(js.at("task").get<std::string>());
          if (!task) throw FormatError("unknown task in routes document");
        }
        route.stops.push_back({task, *n});
      }
      std::vector<Path> legs;
      for (const auto& jl : jr.at("legs")) {
        Path p;
        for (const auto& jn : jl.at("nodes")) {
          auto n = sc.graph.find_node(jn.get<std::string>());
          if (!n) throw FormatError("unknown node in routes document");
          p.nodes.push_back(*n);
        }
        p.length = path_length(sc.graph, p.nodes);
        legs.push_back(std::move(p));
      }
      if (route.stops.size() < 2 || legs.size() + 1 != route.stops.size()) {
        throw FormatError("route has inconsistent stops and legs");
      }
      for (std::size_t k = 0; k < legs.size(); ++k) {
        if (legs[k].nodes.empty() || legs[k].nodes.front() != route.stops[k].node ||
            legs[k].nodes.back() != route.stops[k + 1].node) {
          throw FormatError("leg endpoints do not match stops");
        }
      }
      if (by_vehicle[idx(*v)]) throw FormatError("vehicle listed twice in routes document");
      by_vehicle[idx(*v)] = std::move(route);
      legs_by_vehicle[idx(*v)] = std::move(legs);
    }
    for (std::size_t v = 0; v < sc.vehicles.size(); ++v) {
      if (!by_vehicle[v]) throw FormatError("routes document misses vehicle " + sc.vehicles[v].id);
      out.routes.push_back(std::move(*by_vehicle[v]));
      out.legs.push_back(std::move(legs_by_vehicle[v]));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("routes document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("routes document: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace fleet
