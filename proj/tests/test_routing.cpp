#include <doctest.h>

#include <cmath>

#include "fleet/routing.hpp"
#include "support/support.hpp"

using namespace fleet;
using fleet::testing::ScenarioBuilder;

namespace {

Scenario small_grid() { return load_scenario(std::filesystem::path(FLEET_SCENARIO_DIR) / "small_grid.json"); }

PathTable table_for(const Scenario& sc) {
  const auto ends = routing_endpoints(sc);
  return all_pairs_shortest_paths(sc.graph, ends);
}

std::vector<std::string> stop_names(const Scenario& sc, const Route& r) {
  std::vector<std::string> out;
  for (const Stop& s : r.stops) out.push_back(sc.graph.node(s.node).id);
  return out;
}

Graph triangle() {
  const auto A = make_index<NodeIndex>(0), B = make_index<NodeIndex>(1), C = make_index<NodeIndex>(2);
  std::vector<Node> nodes = {{"A", {0, 0}, NodeKind::intersection},
                             {"B", {0.5, 0.5}, NodeKind::intersection},
                             {"C", {1, 0}, NodeKind::intersection}};
  std::vector<Edge> edges = {{A, B, 1.0, Capacity::narrow}, {B, A, 1.0, Capacity::narrow},
                             {B, C, 1.0, Capacity::narrow}, {C, B, 1.0, Capacity::narrow},
                             {A, C, 3.0, Capacity::narrow}, {C, A, 3.0, Capacity::narrow}};
  return Graph(nodes, edges);
}

}  // namespace

TEST_SUITE("shortest paths") {
  TEST_CASE("triangle prefers the two short sides") {
    const Graph g = triangle();
    const std::vector<NodeIndex> ends = {make_index<NodeIndex>(0), make_index<NodeIndex>(2)};
    const PathTable t = all_pairs_shortest_paths(g, ends);
    const Path& p = t.path(ends[0], ends[1]);
    CHECK(p.length == 2.0);
    REQUIRE(p.nodes.size() == 3);
    CHECK(g.node(p.nodes[1]).id == "B");
  }

  TEST_CASE("path from a node to itself is the node alone") {
    const Graph g = triangle();
    const std::vector<NodeIndex> ends = {make_index<NodeIndex>(0)};
    const PathTable t = all_pairs_shortest_paths(g, ends);
    const Path& p = t.path(ends[0], ends[0]);
    CHECK(p.nodes == ends);
    CHECK(p.length == 0.0);
  }

  TEST_CASE("all-pairs distances equal Floyd-Warshall on random graphs") {
    testing::Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + static_cast<std::size_t>(trial % 19);
      const Graph g = testing::random_graph(rng, n, 0.15);
      const auto oracle = testing::floyd_warshall(g);
      std::vector<NodeIndex> all;
      for (std::size_t i = 0; i < n; ++i) all.push_back(make_index<NodeIndex>(i));
      const PathTable t = all_pairs_shortest_paths(g, all);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const Path& p = t.path(all[i], all[j]);
          CHECK(p.length == oracle[i][j]);
          CHECK(is_valid_path(g, p));
          CHECK(path_length(g, p.nodes) == p.length);
        }
      }
    }
  }
}

TEST_SUITE("routing") {
  TEST_CASE("small grid: robot A4 visits N23, N21, N24 in order") {
    const Scenario sc = small_grid();
    const auto res = plan_routes(sc, table_for(sc));
    REQUIRE(std::holds_alternative<RouteSet>(res));
    const RouteSet& rs = std::get<RouteSet>(res);
    CHECK(rs.routes.size() == 4);
    const Route& a4 = rs.routes[idx(*sc.find_vehicle("A4"))];
    CHECK(stop_names(sc, a4) == std::vector<std::string>{"N04", "N23", "N21", "N24", "N04"});
  }

  TEST_CASE("one task ten metres away gives depot, task, depot") {
    ScenarioBuilder b(100.0);
    b.node("D", 0, 0, NodeKind::depot);
    b.node("T", 10, 0, NodeKind::task_location);
    b.road("D", "T");
    b.vehicle("V", "D", {}, 100.0);
    b.task("t", "T");
    const Scenario sc = b.build();
    const auto res = plan_routes(sc, table_for(sc));
    REQUIRE(std::holds_alternative<RouteSet>(res));
    const RouteSet& rs = std::get<RouteSet>(res);
    CHECK(stop_names(sc, rs.routes[0]) == std::vector<std::string>{"D", "T", "D"});
    CHECK(rs.total_distance() == 20.0);
  }

  TEST_CASE("precedence against closed windows is infeasible") {
    ScenarioBuilder b(200.0);
    b.node("D", 0, 0, NodeKind::depot);
    b.node("P", 10, 0, NodeKind::task_location);
    b.node("Q", 20, 0, NodeKind::task_location);
    b.road("D", "P");
    b.road("P", "Q");
    b.vehicle("V", "D");
    b.task("t2", "Q", {}, TimeWindow{100.0, 150.0});
    b.task("t1", "P", {}, TimeWindow{0.0, 50.0}, {"t2"});
    const Scenario sc = b.build();
    const auto res = plan_routes(sc, table_for(sc));
    REQUIRE(std::holds_alternative<RoutingInfeasible>(res));
    CHECK(std::get<RoutingInfeasible>(res).reason == RoutingFailure::precedence_conflict);
  }

  TEST_CASE("task without a capable vehicle is reported") {
    ScenarioBuilder b(100.0);
    b.node("D", 0, 0, NodeKind::depot);
    b.node("T", 10, 0, NodeKind::task_location);
    b.road("D", "T");
    b.vehicle("V", "D", {"lift"});
    b.task("t", "T", "weld");
    const Scenario sc = b.build();
    const auto res = plan_routes(sc, table_for(sc));
    REQUIRE(std::holds_alternative<RoutingInfeasible>(res));
    const auto& inf = std::get<RoutingInfeasible>(res);
    CHECK(inf.reason == RoutingFailure::no_capable_vehicle);
    CHECK(inf.message.find("routing infeasible: no capable vehicle") != std::string::npos);
  }

  TEST_CASE("short range forces a recharge stop") {
    ScenarioBuilder b(500.0);
    b.node("D", 0, 0, NodeKind::depot);
    b.node("L", -20, 0, NodeKind::task_location);
    b.node("R", 20, 0, NodeKind::task_location);
    b.road("D", "L");
    b.road("D", "R");
    b.vehicle("V", "D", {}, 45.0);
    b.task("l", "L");
    b.task("r", "R");
    const Scenario sc = b.build();
    const auto res = plan_routes(sc, table_for(sc));
    REQUIRE(std::holds_alternative<RouteSet>(res));
    CHECK(stop_names(sc, std::get<RouteSet>(res).routes[0]) ==
          std::vector<std::string>{"D", "L", "D", "R", "D"});
  }

  TEST_CASE("excluding the optimum yields the next best or exhaustion") {
    ScenarioBuilder b(500.0);
    b.node("D", 0, 0, NodeKind::depot);
    b.node("P", 10, 0, NodeKind::task_location);
    b.node("Q", 10, 10, NodeKind::task_location);
    b.road("D", "P");
    b.road("P", "Q");
    b.road("D", "Q", Capacity::narrow, 20.0);
    b.vehicle("V", "D");
    b.task("p", "P");
    b.task("q", "Q");
    const Scenario sc = b.build();
    const PathTable t = table_for(sc);
    const auto first = plan_routes(sc, t);
    REQUIRE(std::holds_alternative<RouteSet>(first));
    std::set<RouteKey> excluded = {route_key(std::get<RouteSet>(first))};
    const auto second = plan_routes(sc, t, excluded);
    REQUIRE(std::holds_alternative<RouteSet>(second));
    CHECK(route_key(std::get<RouteSet>(second)) != route_key(std::get<RouteSet>(first)));
  }

  TEST_CASE("branch and bound matches exhaustive enumeration") {
    testing::Rng rng(7);
    int feasible = 0, infeasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const Scenario sc = testing::random_routing_instance(rng);
      const auto oracle = testing::exhaustive_routing(sc);
      const auto res = plan_routes(sc, table_for(sc));
      INFO("trial " << trial);
      REQUIRE(std::holds_alternative<RouteSet>(res) == oracle.feasible);
      if (oracle.feasible) {
        ++feasible;
        CHECK(std::get<RouteSet>(res).total_distance() == doctest::Approx(oracle.distance).epsilon(1e-12));
      } else {
        ++infeasible;
      }
    }
    CHECK(feasible > 50);
    CHECK(infeasible > 10);
  }
}

TEST_SUITE("nominal timing") {
  TEST_CASE("legs of 10 m and 20 m at 1 m/s") {
    Route r;
    r.stops = {{std::nullopt, make_index<NodeIndex>(0)}, {std::nullopt, make_index<NodeIndex>(1)},
               {std::nullopt, make_index<NodeIndex>(2)}};
    const std::vector<Path> legs = {{{make_index<NodeIndex>(0), make_index<NodeIndex>(1)}, 10.0},
                                    {{make_index<NodeIndex>(1), make_index<NodeIndex>(2)}, 20.0}};
    CHECK(nominal_times(r, legs, 1.0) == std::vector<double>{0.0, 10.0, 30.0});
  }

  TEST_CASE("depot-only route stays at zero") {
    Route r;
    r.stops = {{std::nullopt, make_index<NodeIndex>(0)}, {std::nullopt, make_index<NodeIndex>(0)}};
    const std::vector<Path> legs = {{{make_index<NodeIndex>(0)}, 0.0}};
    CHECK(nominal_times(r, legs, 1.0) == std::vector<double>{0.0, 0.0});
  }

  TEST_CASE("small grid times are grid distances over nominal speed") {
    const Scenario sc = small_grid();
    const auto res = plan_routes(sc, table_for(sc));
    REQUIRE(std::holds_alternative<RouteSet>(res));
    const RouteSet& rs = std::get<RouteSet>(res);
    for (std::size_t r = 0; r < rs.routes.size(); ++r) {
      const Route& route = rs.routes[r];
      const auto times = nominal_times(route, rs.legs[r], sc.vehicle(route.vehicle).nominal_speed);
      double expected = 0.0;
      CHECK(times[0] == 0.0);
      for (std::size_t k = 1; k < route.stops.size(); ++k) {
        const Vec2 a = sc.graph.node(route.stops[k - 1].node).position;
        const Vec2 b = sc.graph.node(route.stops[k].node).position;
        expected += (std::abs(a.x - b.x) + std::abs(a.y - b.y)) / sc.vehicle(route.vehicle).nominal_speed;
        CHECK(times[k] == doctest::Approx(expected));
      }
    }
  }
}
