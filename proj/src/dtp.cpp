#include "fleet/dtp.hpp"

#include <deque>
#include <limits>

namespace fleet {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::generic: return "generic";
    case Family::node_exclusion: return "node-exclusion";
    case Family::same_edge: return "same-edge";
    case Family::head_on: return "head-on";
    case Family::wide_tie: return "wide-tie";
  }
  return "?";
}

int Dtp::add_variable(std::string name) {
  names_.push_back(std::move(name));
  return static_cast<int>(names_.size() - 1);
}

namespace {

struct Arc {
  int to;
  double weight;
};

class IncrementalNetwork {
public:
  explicit IncrementalNetwork(std::size_t n) : out_(n), dist_(n, 0.0), in_queue_(n, false) {}

  /// Adds x[to] >= x[from] + w. Returns false (and leaves the arc in place,
  /// to be removed by rollback) if the system became inconsistent.
  bool add(const DiffConstraint& c) {
    out_[static_cast<std::size_t>(c.from)].push_back({c.to, c.weight});
    arcs_.push_back(c.from);
    if (dist_[c.from] + c.weight <= dist_[c.to]) return true;
    return propagate(c);
  }

  std::size_t mark_arcs() const { return arcs_.size(); }
  std::size_t mark_trail() const { return trail_.size(); }

  void rollback(std::size_t arcs, std::size_t trail) {
    while (arcs_.size() > arcs) {
      out_[static_cast<std::size_t>(arcs_.back())].pop_back();
      arcs_.pop_back();
    }
    while (trail_.size() > trail) {
      dist_[trail_.back().first] = trail_.back().second;
      trail_.pop_back();
    }
  }

  const std::vector<double>& values() const { return dist_; }

private:
  void raise(int v, double value) {
    trail_.emplace_back(v, dist_[v]);
    dist_[v] = value;
  }

  bool propagate(const DiffConstraint& c) {
    std::deque<int> queue;
    raise(c.to, dist_[c.from] + c.weight);
    if (c.to == c.from || c.to == Dtp::origin) return cleanup(queue, false);
    queue.push_back(c.to);
    in_queue_[c.to] = true;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      in_queue_[u] = false;
      for (const Arc& a : out_[static_cast<std::size_t>(u)]) {
        const double nd = dist_[u] + a.weight;
        if (nd <= dist_[a.to]) continue;
        // Any new positive cycle runs through the added arc, so it raises
        // the arc's tail; raising the origin breaks an upper bound.
        if (a.to == c.from || a.to == Dtp::origin) return cleanup(queue, false);
        raise(a.to, nd);
        if (!in_queue_[a.to]) {
          in_queue_[a.to] = true;
          queue.push_back(a.to);
        }
      }
    }
    return true;
  }

  bool cleanup(std::deque<int>& queue, bool result) {
    for (int v : queue) in_queue_[v] = false;
    return result;
  }

  std::vector<std::vector<Arc>> out_;
  std::vector<int> arcs_;
  std::vector<double> dist_;
  std::vector<std::pair<int, double>> trail_;
  std::vector<bool> in_queue_;
};

}  // namespace

DtpSolution solve_dtp(const Dtp& dtp, long node_budget) {
  DtpSolution out;
  IncrementalNetwork net(dtp.variable_count());
  for (const DiffConstraint& c : dtp.hard()) {
    if (!net.add(c)) return out;
  }

  const auto& disj = dtp.disjunctions();
  const std::size_t m = disj.size();
  std::vector<int> choice(m, -1);
  std::vector<std::size_t> arc_mark(m), trail_mark(m);

  // Iterative chronological backtracking.
  std::size_t level = 0;
  while (level < m) {
    if (choice[level] < 0) {
      arc_mark[level] = net.mark_arcs();
      trail_mark[level] = net.mark_trail();
    } else {
      net.rollback(arc_mark[level], trail_mark[level]);
    }
    bool placed = false;
    while (++choice[level] < 2) {
      if (++out.nodes > node_budget) {
        out.status = DtpStatus::budget_exhausted;
        return out;
      }
      if (net.add(disj[level].options[static_cast<std::size_t>(choice[level])])) {
        placed = true;
        break;
      }
      net.rollback(arc_mark[level], trail_mark[level]);
    }
    if (placed) {
      ++level;
      continue;
    }
    choice[level] = -1;
    if (level == 0) return out;
    --level;
  }

  out.status = DtpStatus::feasible;
  out.values = net.values();
  out.choices = std::move(choice);
  return out;
}

std::vector<double> solve_difference_constraints(std::size_t n,
                                                 const std::vector<DiffConstraint>& constraints) {
  std::vector<double> d(n, 0.0);
  for (std::size_t pass = 0; pass <= n; ++pass) {
    bool changed = false;
    for (const DiffConstraint& c : constraints) {
      if (d[c.from] + c.weight > d[c.to]) {
        d[c.to] = d[c.from] + c.weight;
        changed = true;
      }
    }
    if (d[0] > 0.0) return {};
    if (!changed) return d;
  }
  return {};
}

}  // namespace fleet
