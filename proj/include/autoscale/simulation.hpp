#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "autoscale/broker_sim.hpp"
#include "autoscale/controller.hpp"
#include "autoscale/model.hpp"
#include "autoscale/monitor.hpp"

namespace autoscale {

// Applied just before the tick that advances the clock from `tick`.
struct SpeedChange {
  std::int64_t tick = 0;
  PartitionId partition;
  double speed = 0.0;
};

// Random-walk drift of every partition's true speed: every `period` ticks
// each speed moves by a uniform draw in [-delta, delta] percent of capacity,
// clamped to [0, capacity].
struct Drift {
  double delta = 0.0;
  std::int64_t period = 30;
  std::uint64_t seed = 1;
};

// Consumer unreachable for ticks [from, to); to < 0 means for good.
struct Outage {
  ConsumerIndex consumer = 0;
  std::int64_t from = 0;
  std::int64_t to = -1;
};

struct ScenarioPartition {
  PartitionId id;
  double speed = 0.0;
  double lag = 0.0;
};

struct Scenario {
  std::string name;
  std::vector<ScenarioPartition> partitions;
  Assignment initial_assignment;
  std::vector<SpeedChange> speed_changes;
  std::optional<Drift> drift;
  std::vector<Outage> outages;
  std::int64_t ticks = 10000;
  ControllerConfig controller;
  ConsumerConfig consumer;
  MonitorConfig monitor;
};

void validate(const Scenario& s);

std::vector<std::string> builtin_scenario_names();
// Throws ScenarioError for unknown names.
Scenario builtin_scenario(std::string_view name);

Scenario parse_scenario(std::string_view json);
Scenario read_scenario(const std::filesystem::path& path);

struct SimulationResult {
  std::vector<ControlEvent> events;
  // Mutual-exclusion breaches seen by the world plus ordering breaches found
  // in the event log, by tick.
  std::vector<Violation> violations;
  // Index t holds the value after tick t; index 0 is the initial state.
  std::vector<double> total_lag;
  std::vector<std::size_t> consumers;
  std::size_t reassignments = 0;
  std::size_t timeouts = 0;
  std::optional<std::int64_t> last_rebalance_done;
  Assignment final_assignment;
  double total_speed = 0.0;
};

// Runs the controller against the simulated broker for s.ticks ticks. When
// `lag_trace` is set, one JSON line per tick per partition is written to it.
SimulationResult run_simulation(const Scenario& s, std::ostream* lag_trace = nullptr);

// Lag after the final rebalance stays within its value at that point plus
// one tick of production.
bool lag_adequate(const SimulationResult& r);

}  // namespace autoscale
