#include "fleet/comsat.hpp"

#include <spdlog/spdlog.h>

#include "fleet/paths.hpp"

namespace fleet {

ComsatOutcome comsat_schedule(const Scenario& sc) {
  ComsatOutcome out;
  const auto endpoints = routing_endpoints(sc);
  const PathTable table = all_pairs_shortest_paths(sc.graph, endpoints);
  std::set<RouteKey> excluded;
  const int cap = sc.scheduler.max_iterations;

  for (;;) {
    ++out.routings;
    RoutingResult routed = plan_routes(sc, table, excluded);
    if (auto* bad = std::get_if<RoutingInfeasible>(&routed)) {
      out.status = ComsatStatus::infeasible;
      out.message = bad->message;
      return out;
    }
    RouteSet routes = std::get<RouteSet>(std::move(routed));
    spdlog::debug("routing #{}: total distance {:.3f}", out.routings, routes.total_distance());
    const RouteKey key = route_key(routes);
    PathChanger changer(sc, routes, static_cast<std::size_t>(sc.scheduler.k_paths));

    for (;;) {
      if (out.capacity_checks >= cap) {
        out.status = ComsatStatus::iteration_limit;
        out.message = fmt::format("iteration limit of {} capacity checks reached", cap);
        return out;
      }
      ++out.capacity_checks;
      CapacityResult cap_result = verify_capacity(routes, sc);
      spdlog::debug("capacity check #{}: {} disjunctions, {} trials, status {}", out.capacity_checks,
                    cap_result.disjunctions, cap_result.nodes, static_cast<int>(cap_result.status));
      if (cap_result.status == DtpStatus::feasible) {
        out.status = ComsatStatus::feasible;
        out.schedule = std::move(cap_result.schedule);
        out.routes = std::move(routes);
        return out;
      }
      auto changed = changer.next();
      if (!changed) break;
      routes = std::move(*changed);
    }
    excluded.insert(key);
  }
}

}  // namespace fleet
