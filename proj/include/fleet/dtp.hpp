#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fleet {

/// x[to] >= x[from] + weight
struct DiffConstraint {
  int from{0};
  int to{0};
  double weight{0.0};
  friend bool operator==(const DiffConstraint&, const DiffConstraint&) = default;
};

/// Which constraint family a disjunction implements. `generic` is for
/// hand-built problems.
enum class Family { generic, node_exclusion, same_edge, head_on, wide_tie };

std::string_view to_string(Family f);

struct Disjunction {
  std::array<DiffConstraint, 2> options;
  Family family{Family::generic};
  friend bool operator==(const Disjunction&, const Disjunction&) = default;
};

/// Difference constraints plus two-way disjunctions. Variable 0 is the
/// origin: it is fixed at 0 and every other variable is implicitly >= 0.
class Dtp {
public:
  Dtp() : names_{"origin"} {}

  static constexpr int origin = 0;

  int add_variable(std::string name);
  void require(int from, int to, double weight) { hard_.push_back({from, to, weight}); }
  void add_disjunction(DiffConstraint a, DiffConstraint b, Family family = Family::generic) {
    disjunctions_.push_back({{a, b}, family});
  }

  std::size_t variable_count() const { return names_.size(); }
  const std::string& name(int v) const { return names_[static_cast<std::size_t>(v)]; }
  const std::vector<DiffConstraint>& hard() const { return hard_; }
  const std::vector<Disjunction>& disjunctions() const { return disjunctions_; }
  std::vector<Disjunction>& disjunctions() { return disjunctions_; }

private:
  std::vector<std::string> names_;
  std::vector<DiffConstraint> hard_;
  std::vector<Disjunction> disjunctions_;
};

enum class DtpStatus { feasible, infeasible, budget_exhausted };

struct DtpSolution {
  DtpStatus status{DtpStatus::infeasible};
  std::vector<double> values;   // earliest-time assignment (feasible only)
  std::vector<int> choices;     // chosen option per disjunction (feasible only)
  long nodes{0};                // disjunct trials performed
};

/// Chronological backtracking over the disjunctions in stored order, option
/// 0 before option 1. Consistency of the accumulated constraints is kept by
/// incremental longest-path propagation; a positive cycle means
/// inconsistency. The reported values are the least solution.
DtpSolution solve_dtp(const Dtp& dtp, long node_budget = 2'000'000);

/// Least solution of a plain difference-constraint system (variable 0 fixed
/// at 0, all others >= 0); empty when inconsistent. Bellman-Ford.
std::vector<double> solve_difference_constraints(std::size_t variable_count,
                                                 const std::vector<DiffConstraint>& constraints);

}  // namespace fleet
