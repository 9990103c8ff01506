// fleetctl: schedule, verify, simulate and report fleet scenarios.
//
// Exit codes: 0 ok, 1 I/O or validation error, 2 infeasible, 3 iteration
// limit, 4 schedule fails verification, 5 simulation incomplete.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "fleet/comsat.hpp"
#include "fleet/report.hpp"
#include "fleet/schedule_io.hpp"

namespace fs = std::filesystem;
using namespace fleet;

namespace {

enum Exit { ok = 0, io_error = 1, infeasible = 2, iteration_limit = 3, verify_failed = 4, incomplete = 5 };

struct Overrides {
  std::optional<double> mu;
  std::optional<double> dt;
  std::optional<int> horizon_n;
  std::optional<long> max_steps;
};

Scenario load(const std::string& path, const Overrides& o) {
  Scenario sc = load_scenario(path);
  if (o.mu) sc.mu = *o.mu;
  if (o.dt) sc.mpc.dt = *o.dt;
  if (o.horizon_n) sc.mpc.horizon = *o.horizon_n;
  if (o.max_steps) sc.sim.max_steps = *o.max_steps;
  validate(sc);
  return sc;
}

fs::path routes_beside(const fs::path& schedule) { return schedule.parent_path() / "routes.json"; }

int cmd_schedule(const std::string& scenario_path, const fs::path& out, const Overrides& o) {
  const Scenario sc = load(scenario_path, o);
  const ComsatOutcome res = comsat_schedule(sc);
  if (res.status == ComsatStatus::infeasible) {
    std::cerr << res.message << "\n";
    return infeasible;
  }
  if (res.status == ComsatStatus::iteration_limit) {
    std::cerr << res.message << "\n";
    return iteration_limit;
  }
  fs::create_directories(out);
  write_file(out / "schedule.csv", schedule_to_csv(res.schedule, sc));
  write_file(out / "routes.json", routes_to_json(res.routes, sc));
  std::cout << fmt::format("feasible: {} vehicles, total distance {:.3f} m, {} capacity check(s), {} routing(s)\n",
                           sc.vehicles.size(), res.routes.total_distance(), res.capacity_checks, res.routings);
  return ok;
}

ConflictReport check(const Scenario& sc, const Schedule& schedule, const RouteSet& routes) {
  const ConflictReport report = verify_schedule(schedule, routes, sc);
  for (const Violation& v : report.violations) {
    std::cout << fmt::format("{}: {} (by {:.6f} s)\n", v.family, v.detail, v.magnitude);
  }
  return report;
}

int cmd_verify(const std::string& scenario_path, const fs::path& schedule_path, const Overrides& o) {
  const Scenario sc = load(scenario_path, o);
  const Schedule schedule = schedule_from_csv(read_file(schedule_path), sc);
  const RouteSet routes = routes_from_json(read_file(routes_beside(schedule_path)), sc);
  const ConflictReport report = check(sc, schedule, routes);
  if (!report.empty()) {
    std::cout << report.violations.size() << " violation(s)\n";
    return verify_failed;
  }
  std::cout << "schedule verified\n";
  return ok;
}

int cmd_simulate(const std::string& scenario_path, const fs::path& schedule_path, const fs::path& out,
                 const Overrides& o) {
  const Scenario sc = load(scenario_path, o);
  const Schedule schedule = schedule_from_csv(read_file(schedule_path), sc);
  const RouteSet routes = routes_from_json(read_file(routes_beside(schedule_path)), sc);
  if (!check(sc, schedule, routes).empty()) {
    std::cerr << "refusing to simulate a schedule that fails verification\n";
    return verify_failed;
  }
  const SimLog log = run_simulation(sc, schedule, routes);
  const AuditReport audit = safety_audit(log, sc);
  fs::create_directories(out);
  write_file(out / "arrivals.csv", arrivals_to_csv(arrival_rows(log, sc)));
  write_file(out / "trace.csv", trace_to_csv(log, sc));
  write_file(out / "planner_trace.csv", planner_trace_to_csv(log, sc));
  write_file(out / "audit.csv", audit_to_csv(audit, sc));
  std::cout << fmt::format("{} after {} steps ({:.1f} s); min separation {:.3f} m, min obstacle distance {:.3f} m, "
                           "{} audit finding(s)\n",
                           log.completed ? "completed" : "incomplete", log.steps,
                           static_cast<double>(log.steps) * log.dt, audit.min_separation,
                           audit.min_obstacle_distance, audit.findings.size());
  const bool deadlock = std::any_of(audit.findings.begin(), audit.findings.end(),
                                    [](const AuditFinding& f) { return f.kind == "deadlock"; });
  return log.completed && !deadlock ? ok : incomplete;
}

int cmd_report(const fs::path& run, const fs::path& out) {
  const auto rows = arrivals_from_csv(read_file(run / "arrivals.csv"));
  if (rows.empty()) throw FormatError("no arrivals in " + (run / "arrivals.csv").string());
  const DelayReport report = delay_report(rows);
  const std::string text = summary_text(report);
  fs::create_directories(out);
  write_file(out / "delay_summary.txt", text);
  write_file(out / "delay_series.csv", delay_series_csv(rows));
  write_file(out / "delay_histogram.csv", histogram_csv(report));
  std::cout << text;
  return ok;
}

void configure_logging() {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("FLEET_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Fleet scheduling and simulation"};
  app.require_subcommand(1);

  std::string scenario, schedule, out, run;
  Overrides o;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--mu", o.mu, "safety margin override, seconds");
    cmd->add_option("--dt", o.dt, "control step override, seconds");
    cmd->add_option("--horizon-n", o.horizon_n, "MPC horizon override, steps");
  };

  auto* sched = app.add_subcommand("schedule", "compute a conflict-free schedule");
  sched->add_option("--scenario", scenario, "scenario file")->required();
  sched->add_option("--out", out, "output directory")->required();
  add_common(sched);

  auto* ver = app.add_subcommand("verify", "check a schedule against every constraint");
  ver->add_option("--scenario", scenario, "scenario file")->required();
  ver->add_option("--schedule", schedule, "schedule.csv (routes.json must sit beside it)")->required();
  add_common(ver);

  auto* sim = app.add_subcommand("simulate", "run the schedule in the 2D simulator");
  sim->add_option("--scenario", scenario, "scenario file")->required();
  sim->add_option("--schedule", schedule, "schedule.csv (routes.json must sit beside it)")->required();
  sim->add_option("--out", out, "output directory")->required();
  sim->add_option("--max-steps", o.max_steps, "step limit (default: from the schedule length)");
  add_common(sim);

  auto* rep = app.add_subcommand("report", "summarize arrival delays of a simulation run");
  rep->add_option("--run", run, "directory holding arrivals.csv")->required();
  rep->add_option("--out", out, "output directory (default: the run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : io_error;
  }

  try {
    if (*sched) return cmd_schedule(scenario, out, o);
    if (*ver) return cmd_verify(scenario, schedule, o);
    if (*sim) return cmd_simulate(scenario, schedule, out, o);
    if (*rep) return cmd_report(run, out.empty() ? fs::path(run) : fs::path(out));
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_error;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_error;
  }
  return io_error;
}
