// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <fmt/format.h>

#include "fleet/comsat.hpp"
#include "fleet/paths.hpp"
#include "fleet/report.hpp"
#include "fleet/routing.hpp"
#include "fleet/schedule_io.hpp"
#include "support/support.hpp"

using namespace fleet;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kSmallDelay = 10.0;          // s, every arrival on the small grid
constexpr double kSmallScheduleTime = 60.0;   // s wall time
constexpr double kLargeBand = 2.0;            // s
constexpr double kLargeBandShare = 0.85;
constexpr double kLargeLateness = 10.0;       // s
constexpr double kLargeRuntime = 600.0;       // s wall time, schedule plus simulate
constexpr int kRandomSchedulingInstances = 24;
constexpr int kRandomDtps = 200;
constexpr std::size_t kDtpDisjunctions = 12;
constexpr double kDtpRuntime = 5.0;           // s
constexpr int kRoutingInstances = 300;
constexpr int kShortestPathGraphs = 50;
constexpr int kMpcInstances = 100;
constexpr double kGradientError = 1e-4;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Run {
  Scenario scenario;
  ComsatOutcome outcome;
  SimLog log;
  AuditReport audit;
  double schedule_seconds{0.0};
  double total_seconds{0.0};
  bool verified{false};
  std::string schedule_csv;
  std::string arrivals_csv;
};

Run run_scenario(const std::string& name) {
  Run r;
  r.scenario = load_scenario(std::filesystem::path(FLEET_SCENARIO_DIR) / (name + ".json"));
  const auto t0 = Clock::now();
  r.outcome = comsat_schedule(r.scenario);
  r.schedule_seconds = seconds_since(t0);
  if (r.outcome.status != ComsatStatus::feasible) return r;
  r.verified = verify_schedule(r.outcome.schedule, r.outcome.routes, r.scenario).empty();
  r.log = run_simulation(r.scenario, r.outcome.schedule, r.outcome.routes);
  r.total_seconds = seconds_since(t0);
  r.audit = safety_audit(r.log, r.scenario);
  r.schedule_csv = schedule_to_csv(r.outcome.schedule, r.scenario);
  r.arrivals_csv = arrivals_to_csv(arrival_rows(r.log, r.scenario));
  return r;
}

bool feasible(const Run& r) { return r.outcome.status == ComsatStatus::feasible; }

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

void small_grid(const Run& r) {
  if (!feasible(r)) return report(1, false, "small grid not feasible: " + r.outcome.message);
  double worst = 0.0;
  for (const ArrivalEvent& e : r.log.arrivals) worst = std::max(worst, std::abs(e.delay()));
  std::size_t visits = 0;
  for (const auto& v : r.outcome.schedule.per_vehicle) visits += v.size();
  const bool pass = r.schedule_seconds <= kSmallScheduleTime && r.verified && r.log.completed &&
                    r.log.arrivals.size() == visits && worst <= kSmallDelay;
  report(1, pass,
         fmt::format("schedule {:.2f} s, verified {}, completed {}, {} of {} arrivals, max |delay| {:.3f} s (<= {} s)",
                     r.schedule_seconds, r.verified, r.log.completed, r.log.arrivals.size(), visits, worst,
                     kSmallDelay));
}

void large_plant(const Run& r) {
  if (!feasible(r)) return report(2, false, "large plant not feasible: " + r.outcome.message);
  std::size_t within = 0;
  double lateness = 0.0;
  for (const ArrivalEvent& e : r.log.arrivals) {
    if (std::abs(e.delay()) <= kLargeBand) ++within;
    lateness = std::max(lateness, e.delay());
  }
  const double share = r.log.arrivals.empty() ? 0.0 : static_cast<double>(within) / r.log.arrivals.size();
  const bool pass = r.log.completed && share >= kLargeBandShare && lateness <= kLargeLateness &&
                    r.total_seconds <= kLargeRuntime;
  report(2, pass,
         fmt::format("completed {}, {:.1f}% within {} s, max lateness {:.3f} s, runtime {:.1f} s", r.log.completed,
                     100.0 * share, kLargeBand, lateness, r.total_seconds));
}

void soundness(const Run& small, const Run& large) {
  testing::Rng rng(20240601);
  int schedules = 0, clean = 0;
  auto check = [&](const Scenario& sc, const ComsatOutcome& out) {
    if (out.status != ComsatStatus::feasible) return;
    ++schedules;
    if (verify_schedule(out.schedule, out.routes, sc).empty()) ++clean;
  };
  for (int i = 0; i < kRandomSchedulingInstances; ++i) {
    Scenario sc = testing::random_scheduling_instance(rng);
    sc.mu = 20.0;
    check(sc, comsat_schedule(sc));
  }
  const int random_schedules = schedules;
  check(small.scenario, small.outcome);
  check(large.scenario, large.outcome);
  const bool pass = clean == schedules && random_schedules >= 20 && feasible(small) && feasible(large);
  report(3, pass,
         fmt::format("{} of {} returned schedules verify clean ({} random instances feasible of {})", clean, schedules,
                     random_schedules, kRandomSchedulingInstances));
}

void dtp_oracle() {
  testing::Rng rng(99);
  int agree = 0;
  const auto t0 = Clock::now();
  double solver_seconds = 0.0;
  for (int i = 0; i < kRandomDtps; ++i) {
    const Dtp dtp = testing::random_dtp(rng, kDtpDisjunctions);
    const auto s0 = Clock::now();
    const DtpSolution res = solve_dtp(dtp);
    solver_seconds += seconds_since(s0);
    if ((res.status == DtpStatus::feasible) == testing::dtp_brute_force(dtp)) ++agree;
  }
  const double total = seconds_since(t0);
  report(4, agree == kRandomDtps && total <= kDtpRuntime,
         fmt::format("{} of {} verdicts agree, solver {:.3f} s, with oracle {:.3f} s", agree, kRandomDtps,
                     solver_seconds, total));
}

void routing_oracle() {
  testing::Rng rng(7);
  int agree = 0, feasible_count = 0;
  for (int i = 0; i < kRoutingInstances; ++i) {
    const Scenario sc = testing::random_routing_instance(rng);
    const auto oracle = testing::exhaustive_routing(sc);
    const auto res = plan_routes(sc, all_pairs_shortest_paths(sc.graph, routing_endpoints(sc)));
    const bool ok = std::holds_alternative<RouteSet>(res) == oracle.feasible &&
                    (!oracle.feasible ||
                     std::abs(std::get<RouteSet>(res).total_distance() - oracle.distance) <= 1e-9);
    if (ok) ++agree;
    if (oracle.feasible) ++feasible_count;
  }
  report(5, agree == kRoutingInstances,
         fmt::format("{} of {} instances agree ({} feasible)", agree, kRoutingInstances, feasible_count));
}

void shortest_paths() {
  testing::Rng rng(2024);
  int exact = 0;
  for (int g = 0; g < kShortestPathGraphs; ++g) {
    const std::size_t n = 2 + static_cast<std::size_t>(g % 19);
    const Graph graph = testing::random_graph(rng, n, 0.15);
    const auto oracle = testing::floyd_warshall(graph);
    std::vector<NodeIndex> all;
    for (std::size_t i = 0; i < n; ++i) all.push_back(make_index<NodeIndex>(i));
    const PathTable t = all_pairs_shortest_paths(graph, all);
    bool same = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) same = same && t.path(all[i], all[j]).length == oracle[i][j];
    }
    if (same) ++exact;
  }
  report(6, exact == kShortestPathGraphs, fmt::format("{} of {} graphs match exactly", exact, kShortestPathGraphs));
}

void mpc_checks() {
  testing::Rng rng(42);
  double worst = 0.0;
  int monotone = 0, bounded = 0;
  for (int i = 0; i < kMpcInstances; ++i) {
    std::vector<Polygon> storage;
    const MpcProblem pr = testing::random_mpc_problem(rng, storage);
    const auto u = testing::random_actions(rng, pr);
    worst = std::max(worst, testing::gradient_relative_error(pr, u));
    const MpcSolution sol = solve_mpc(pr, u);
    if (std::is_sorted(sol.history.rbegin(), sol.history.rend())) ++monotone;
    if (testing::actions_within_bounds(sol.actions, pr.previous, pr.params, pr.max_speed)) ++bounded;
  }
  report(7, worst < kGradientError && monotone == kMpcInstances && bounded == kMpcInstances,
         fmt::format("max gradient rel. error {:.2e}, {} of {} monotone, {} of {} within bounds", worst, monotone,
                     kMpcInstances, bounded, kMpcInstances));
}

bool safe(const Run& r, std::string& detail) {
  double two_r = INFINITY;
  for (const Vehicle& v : r.scenario.vehicles) two_r = std::min(two_r, 2.0 * v.footprint_radius);
  const bool ok = feasible(r) && r.audit.min_separation >= two_r && r.audit.min_obstacle_distance >= 0.0 &&
                  r.audit.clean();
  detail += fmt::format("{}: min separation {:.3f} m (>= {:.2f}), min obstacle distance {:.3f} m, {} finding(s); ",
                        r.scenario.name, r.audit.min_separation, two_r, r.audit.min_obstacle_distance,
                        r.audit.findings.size());
  return ok;
}

void determinism(const Run& a_small, const Run& a_large) {
  const Run b_small = run_scenario("small_grid");
  const Run b_large = run_scenario("large_plant");
  const bool pass = feasible(a_small) && feasible(a_large) && a_small.schedule_csv == b_small.schedule_csv &&
                    a_small.arrivals_csv == b_small.arrivals_csv && a_large.schedule_csv == b_large.schedule_csv &&
                    a_large.arrivals_csv == b_large.arrivals_csv;
  report(9, pass, "repeated schedule and simulate runs give byte-identical schedule and arrivals CSV");
}

}  // namespace

int main() {
  const Run small = run_scenario("small_grid");
  small_grid(small);
  const Run large = run_scenario("large_plant");
  large_plant(large);
  soundness(small, large);
  dtp_oracle();
  routing_oracle();
  shortest_paths();
  mpc_checks();
  std::string detail;
  const bool s1 = safe(small, detail);
  const bool s2 = safe(large, detail);
  report(8, s1 && s2, detail);
  determinism(small, large);
  return failures == 0 ? 0 : 1;
}
