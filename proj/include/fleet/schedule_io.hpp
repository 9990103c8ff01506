#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fleet/capacity.hpp"

namespace fleet {

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// `vehicle,node,time_s`, one row per visit, vehicles in scenario order.
std::string schedule_to_csv(const Schedule& schedule, const Scenario& scenario);
Schedule schedule_from_csv(const std::string& text, const Scenario& scenario);

/// Routes with their stops and the node list of every leg.
std::string routes_to_json(const RouteSet& routes, const Scenario& scenario);
RouteSet routes_from_json(const std::string& text, const Scenario& scenario);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fleet
