#include "fleet/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace fleet {

namespace {

/// Dijkstra with banned nodes and edges; ties resolve to the lower node index.
std::optional<Path> restricted_shortest(const Graph& g, NodeIndex s, NodeIndex t,
                                        const std::vector<bool>& banned_node,
                                        const std::set<std::size_t>& banned_edge) {
  const std::size_t n = g.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[idx(s)] = 0.0;
  open.emplace(0.0, idx(s));
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == idx(t)) break;
    for (EdgeIndex e : g.out_edges(make_index<NodeIndex>(u))) {
      const std::size_t v = idx(g.edge(e).to);
      if (banned_node[v] || banned_edge.count(idx(e))) continue;
      const double nd = d + g.edge(e).length;
      if (nd < dist[v]) {
        dist[v] = nd;
        parent[v] = u;
        open.emplace(nd, v);
      }
    }
  }
  if (!std::isfinite(dist[idx(t)])) return std::nullopt;
  Path p;
  p.length = dist[idx(t)];
  for (std::size_t v = idx(t); v != n; v = parent[v]) {
    p.nodes.push_back(make_index<NodeIndex>(v));
    if (v == idx(s)) break;
  }
  std::reverse(p.nodes.begin(), p.nodes.end());
  return p;
}

}  // namespace

std::vector<Path> k_shortest_paths(const Graph& g, NodeIndex s, NodeIndex t, std::size_t k) {
  std::vector<Path> found;
  if (k == 0) return found;
  if (s == t) {
    found.push_back(Path{{s}, 0.0});
    return found;
  }
  std::vector<bool> no_nodes(g.node_count(), false);
  auto first = restricted_shortest(g, s, t, no_nodes, {});
  if (!first) return found;
  found.push_back(*first);
  std::vector<Path> pool;
  while (found.size() < k) {
    const Path& prev = found.back();
    for (std::size_t j = 0; j + 1 < prev.nodes.size(); ++j) {
      const NodeIndex spur = prev.nodes[j];
      const std::vector<NodeIndex> root(prev.nodes.begin(), prev.nodes.begin() + static_cast<long>(j) + 1);
      std::set<std::size_t> banned_edges;
      for (const Path& p : found) {
        if (p.nodes.size() > j + 1 && std::equal(root.begin(), root.end(), p.nodes.begin())) {
          banned_edges.insert(idx(*g.find_edge(p.nodes[j], p.nodes[j + 1])));
        }
      }
      std::vector<bool> banned_nodes(g.node_count(), false);
      for (std::size_t r = 0; r < j; ++r) banned_nodes[idx(root[r])] = true;
      auto tail = restricted_shortest(g, spur, t, banned_nodes, banned_edges);
      if (!tail) continue;
      Path candidate;
      candidate.nodes = root;
      candidate.nodes.insert(candidate.nodes.end(), tail->nodes.begin() + 1, tail->nodes.end());
      candidate.length = path_length(g, candidate.nodes);
      const auto same = [&](const Path& p) { return p.nodes == candidate.nodes; };
      if (std::none_of(found.begin(), found.end(), same) && std::none_of(pool.begin(), pool.end(), same)) {
        pool.push_back(std::move(candidate));
      }
    }
    if (pool.empty()) break;
    auto best = std::min_element(pool.begin(), pool.end(),
                                 [](const Path& a, const Path& b) { return a.length < b.length; });
    found.push_back(*best);
    pool.erase(best);
  }
  return found;
}

PathChanger::PathChanger(const Scenario& scenario, RouteSet initial, std::size_t k)
    : scenario_(scenario), k_(k), current_(std::move(initial)) {
  for (std::size_t r = 0; r < current_.legs.size(); ++r) {
    for (std::size_t l = 0; l < current_.legs[r].size(); ++l) leg_ids_.emplace_back(r, l);
  }
  cache_.resize(leg_ids_.size());
  choice_.assign(leg_ids_.size(), 0);
  tried_.insert(choice_);
}

const std::vector<Path>& PathChanger::candidates(std::size_t leg) {
  if (!cache_[leg]) {
    const auto [r, l] = leg_ids_[leg];
    const Path& base = current_.legs[r][l];
    auto paths = k_shortest_paths(scenario_.graph, base.nodes.front(), base.nodes.back(), k_);
    // The initial leg is candidate 0 even if Yen orders an equal-length path first.
    auto it = std::find_if(paths.begin(), paths.end(), [&](const Path& p) { return p.nodes == base.nodes; });
    if (it != paths.end()) {
      std::rotate(paths.begin(), it, it + 1);
    } else {
      paths.insert(paths.begin(), base);
      if (paths.size() > k_) paths.pop_back();
    }
    cache_[leg] = std::move(paths);
  }
  return *cache_[leg];
}

std::optional<RouteSet> PathChanger::next() {
  std::optional<std::size_t> best_leg;
  double best_delta = 0.0;
  for (std::size_t leg = 0; leg < leg_ids_.size(); ++leg) {
    const auto& c = candidates(leg);
    if (choice_[leg] + 1 >= c.size()) continue;
    auto combo = choice_;
    ++combo[leg];
    if (tried_.count(combo)) continue;
    const double delta = c[choice_[leg] + 1].length - c[choice_[leg]].length;
    if (!best_leg || delta < best_delta) {
      best_leg = leg;
      best_delta = delta;
    }
  }
  if (!best_leg) return std::nullopt;
  ++choice_[*best_leg];
  tried_.insert(choice_);
  const auto [r, l] = leg_ids_[*best_leg];
  current_.legs[r][l] = candidates(*best_leg)[choice_[*best_leg]];
  return current_;
}

}  // namespace fleet
