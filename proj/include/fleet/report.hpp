#pragma once

#include <string>
#include <vector>

#include "fleet/simulator.hpp"

namespace fleet {

/// One line of arrivals.csv.
struct ArrivalRow {
  std::string vehicle;
  std::string node;
  double scheduled{0.0};
  double actual{0.0};
  double delay{0.0};
};

std::vector<ArrivalRow> arrival_rows(const SimLog& log, const Scenario& scenario);

std::string arrivals_to_csv(const std::vector<ArrivalRow>& rows);
std::vector<ArrivalRow> arrivals_from_csv(const std::string& text);

std::string trace_to_csv(const SimLog& log, const Scenario& scenario);
std::string planner_trace_to_csv(const SimLog& log, const Scenario& scenario);
std::string audit_to_csv(const AuditReport& audit, const Scenario& scenario);

struct DelaySummary {
  std::string vehicle;  // "all" for the fleet-wide line
  std::size_t count{0};
  double mean{0.0};
  double min{0.0};
  double max{0.0};
  double mean_abs{0.0};
  double within_1s{0.0};  // fraction with |delay| <= 1
  double within_2s{0.0};
};

struct DelayBucket {
  std::string vehicle;
  double lo{0.0};
  double hi{0.0};
  std::size_t count{0};
};

struct DelayReport {
  std::vector<DelaySummary> per_vehicle;  // first-seen vehicle order
  DelaySummary overall;
  std::vector<DelayBucket> histogram;     // per vehicle, bucket_width wide, empty buckets omitted
};

DelayReport delay_report(const std::vector<ArrivalRow>& rows, double bucket_width = 1.0);

std::string summary_text(const DelayReport& report);
/// vehicle,seq,node,delay_s: delay against visit order, one series per vehicle.
std::string delay_series_csv(const std::vector<ArrivalRow>& rows);
/// vehicle,bucket_lo_s,bucket_hi_s,count
std::string histogram_csv(const DelayReport& report);

}  // namespace fleet
