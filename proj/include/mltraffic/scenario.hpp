#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mltraffic/grid.hpp"
#include "mltraffic/multilane.hpp"
#include "mltraffic/scalar.hpp"
#include "mltraffic/schedule.hpp"

namespace mltraffic {

/// Initial density of one lane: offset + amplitude * sin(omega pi x) (or cos),
/// or a constant when kind is kConstant.
struct IcProfile {
  enum class Kind { kConstant, kSin, kCos };
  Kind kind = Kind::kConstant;
  double offset = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;

  double value(double x) const;
  /// Exact mean over [a, b].
  double cell_average(double a, double b) const;

  bool operator==(const IcProfile&) const = default;
};

struct LaneConfig {
  double v_max = 1.0;
  double r_max = 1.0;
  bool operator==(const LaneConfig&) const = default;
};

struct AvConfig {
  std::size_t lane = 1;  // 1-based, as written in config files
  double y0 = 0.0;
  SpeedSchedule schedule;
  bool operator==(const AvConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  std::vector<LaneConfig> lanes;
  double tau = 1.0;
  GridSpec grid;
  double t_final = 0.0;
  std::vector<IcProfile> ic;
  std::vector<AvConfig> avs;
  std::vector<double> outputs;

  bool operator==(const ScenarioConfig&) const = default;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  std::vector<LaneSpec> lane_specs() const;
  MultiLaneModel model() const;
  MultiLaneState initial_state() const;
  /// Equilibrium model of the total density: M lanes of the averaged law.
  LimitSpec limit_spec() const;
  std::vector<double> initial_total_density() const;

  /// Replaces the grid resolution, keeping the domain.
  void set_dx(double dx);
};

/// Parses the sectioned `key = value` format. Errors carry the offending line number.
ScenarioConfig parse_config(const std::string& text);
std::string serialize_config(const ScenarioConfig& config);

/// threelane, relax-c1, relax-c2, mb-ic1 ... mb-ic5.
ScenarioConfig builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

/// Builtin name, or otherwise a path to a config file.
ScenarioConfig load_scenario(const std::string& name_or_path);

}  // namespace mltraffic
