#pragma once

#include <optional>
#include <set>
#include <vector>

#include "fleet/routing.hpp"

namespace fleet {

/// Up to k loopless paths from source to target in non-decreasing length
/// (Yen). Equal lengths keep discovery order.
std::vector<Path> k_shortest_paths(const Graph& graph, NodeIndex source, NodeIndex target, std::size_t k);

/// Swaps route legs for longer alternatives after a failed capacity check.
/// Every leg has up to k candidate paths; a combination is the candidate index
/// chosen for each leg. Each call to next() advances exactly one leg by one
/// candidate, taking the cheapest untried combination reachable that way.
class PathChanger {
public:
  PathChanger(const Scenario& scenario, RouteSet initial, std::size_t k);

  /// Next route set, or nullopt once no untried single-step change is left.
  std::optional<RouteSet> next();

  const RouteSet& current() const { return current_; }

private:
  const std::vector<Path>& candidates(std::size_t leg);

  const Scenario& scenario_;
  std::size_t k_;
  RouteSet current_;
  std::vector<std::pair<std::size_t, std::size_t>> leg_ids_;  // flat leg -> (route, leg)
  std::vector<std::optional<std::vector<Path>>> cache_;
  std::vector<std::size_t> choice_;
  std::set<std::vector<std::size_t>> tried_;
};

}  // namespace fleet
