#include "fleet/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "fleet/schedule_io.hpp"

namespace fleet {

std::vector<ArrivalRow> arrival_rows(const SimLog& log, const Scenario& sc) {
  std::vector<ArrivalRow> rows;
  for (const ArrivalEvent& e : log.arrivals) {
    rows.push_back({sc.vehicle(e.vehicle).id, sc.graph.node(e.node).id, e.scheduled, e.actual, e.delay()});
  }
  return rows;
}

std::string arrivals_to_csv(const std::vector<ArrivalRow>& rows) {
  std::string out = "vehicle,node,scheduled_s,actual_s,delay_s\n";
  for (const ArrivalRow& r : rows) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", r.vehicle, r.node, r.scheduled, r.actual, r.delay);
  }
  return out;
}

namespace {

double number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError(fmt::format("line {}: bad number '{}'", line, s));
  return v;
}

}  // namespace

std::vector<ArrivalRow> arrivals_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "vehicle,node,scheduled_s,actual_s,delay_s") {
    throw FormatError("missing arrivals header");
  }
  std::vector<ArrivalRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() != 5) throw FormatError(fmt::format("line {}: expected 5 fields", lineno));
    rows.push_back({f[0], f[1], number(f[2], lineno), number(f[3], lineno), number(f[4], lineno)});
  }
  return rows;
}

std::string trace_to_csv(const SimLog& log, const Scenario& sc) {
  std::string out = "step,vehicle,x,y,theta,v,omega\n";
  for (const TraceRow& r : log.trace) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.step, sc.vehicle(r.vehicle).id, r.state.x,
                       r.state.y, r.state.theta, r.action.v, r.action.omega);
  }
  return out;
}

std::string planner_trace_to_csv(const SimLog& log, const Scenario& sc) {
  std::string out = "step,vehicle,speed,anchor,target,holding,parked\n";
  for (const PlannerTraceRow& r : log.planner) {
    out += fmt::format("{},{},{:.6f},{},{},{},{}\n", r.step, sc.vehicle(r.vehicle).id, r.speed, r.anchor, r.target,
                       r.holding ? 1 : 0, r.parked ? 1 : 0);
  }
  return out;
}

std::string audit_to_csv(const AuditReport& audit, const Scenario& sc) {
  std::string out = "kind,vehicle,other,start_s,end_s,value\n";
  out += fmt::format("min_separation,,,,,{:.6f}\n", audit.min_separation);
  out += fmt::format("min_obstacle_distance,,,,,{:.6f}\n", audit.min_obstacle_distance);
  for (const AuditFinding& f : audit.findings) {
    out += fmt::format("{},{},{},{:.3f},{:.3f},{:.6f}\n", f.kind, sc.vehicle(f.vehicle).id,
                       f.other ? sc.vehicle(*f.other).id : "", f.start, f.end, f.value);
  }
  return out;
}

namespace {

DelaySummary summarize(const std::string& name, const std::vector<double>& d) {
  DelaySummary s;
  s.vehicle = name;
  s.count = d.size();
  if (d.empty()) return s;
  double sum = 0.0, sum_abs = 0.0;
  std::size_t w1 = 0, w2 = 0;
  s.min = s.max = d.front();
  for (double x : d) {
    sum += x;
    sum_abs += std::abs(x);
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    w1 += std::abs(x) <= 1.0;
    w2 += std::abs(x) <= 2.0;
  }
  const auto n = static_cast<double>(d.size());
  s.mean = sum / n;
  s.mean_abs = sum_abs / n;
  s.within_1s = static_cast<double>(w1) / n;
  s.within_2s = static_cast<double>(w2) / n;
  return s;
}

}  // namespace

DelayReport delay_report(const std::vector<ArrivalRow>& rows, double width) {
  DelayReport out;
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_vehicle;
  std::vector<double> all;
  for (const ArrivalRow& r : rows) {
    if (!by_vehicle.count(r.vehicle)) order.push_back(r.vehicle);
    by_vehicle[r.vehicle].push_back(r.delay);
    all.push_back(r.delay);
  }
  for (const std::string& v : order) {
    out.per_vehicle.push_back(summarize(v, by_vehicle[v]));
    std::map<long, std::size_t> buckets;
    for (double d : by_vehicle[v]) ++buckets[static_cast<long>(std::floor(d / width))];
    for (const auto& [b, n] : buckets) {
      out.histogram.push_back({v, static_cast<double>(b) * width, static_cast<double>(b + 1) * width, n});
    }
  }
  out.overall = summarize("all", all);
  return out;
}

std::string summary_text(const DelayReport& report) {
  std::string out = fmt::format("{:<10} {:>6} {:>9} {:>9} {:>9} {:>9} {:>8} {:>8}\n", "vehicle", "nodes", "mean_s",
                                "min_s", "max_s", "mean|d|", "<=1s", "<=2s");
  auto line = [&](const DelaySummary& s) {
    out += fmt::format("{:<10} {:>6} {:>9.3f} {:>9.3f} {:>9.3f} {:>9.3f} {:>7.1f}% {:>7.1f}%\n", s.vehicle, s.count,
                       s.mean, s.min, s.max, s.mean_abs, 100.0 * s.within_1s, 100.0 * s.within_2s);
  };
  for (const DelaySummary& s : report.per_vehicle) line(s);
  line(report.overall);
  return out;
}

std::string delay_series_csv(const std::vector<ArrivalRow>& rows) {
  std::string out = "vehicle,seq,node,delay_s\n";
  std::map<std::string, std::size_t> seq;
  for (const ArrivalRow& r : rows) {
    out += fmt::format("{},{},{},{:.6f}\n", r.vehicle, seq[r.vehicle]++, r.node, r.delay);
  }
  return out;
}

std::string histogram_csv(const DelayReport& report) {
  std::string out = "vehicle,bucket_lo_s,bucket_hi_s,count\n";
  for (const DelayBucket& b : report.histogram) {
    out += fmt::format("{},{:.3f},{:.3f},{}\n", b.vehicle, b.lo, b.hi, b.count);
  }
  return out;
}

}  // namespace fleet
