#include "autoscale/simulation.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "autoscale/error.hpp"
#include "json.hpp"

namespace autoscale {
namespace {

std::size_t count_events(const SimulationResult& r, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& e : r.events) n += e.event == kind;
  return n;
}

TEST(Builtin, UnknownNameIsScenarioError) {
  try {
    builtin_scenario("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScenarioError);
  }
}

TEST(Builtin, AllNamesValidate) {
  for (const auto& name : builtin_scenario_names()) {
    EXPECT_NO_THROW(validate(builtin_scenario(name))) << name;
  }
}

TEST(Simulation, SteadyConsolidatesAndStaysBounded) {
  const SimulationResult r = run_simulation(builtin_scenario("steady-60pct"));
  EXPECT_TRUE(r.violations.empty());
  ASSERT_TRUE(r.last_rebalance_done);
  EXPECT_LT(r.consumers.back(), 5u);
  EXPECT_TRUE(lag_adequate(r));
  // Nothing moves once the group has settled.
  for (const auto& e : r.events) {
    if (e.event == "reassign") EXPECT_LE(e.tick, 120);
  }
}

TEST(Simulation, StepOverloadHasOneCycle) {
  const SimulationResult r = run_simulation(builtin_scenario("step-overload"));
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(count_events(r, "reassign"), 1u);
  EXPECT_EQ(r.reassignments, 1u);
}

TEST(Simulation, DrainToZeroShrinksToBound) {
  const Scenario s = builtin_scenario("drain-to-zero");
  const SimulationResult r = run_simulation(s);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.consumers.back(), 1u);
  EXPECT_LE(r.reassignments,
            static_cast<std::size_t>(s.controller.policy.hysteresis_cycles));
}

TEST(Simulation, DoubleStartFixtureIsCaught) {
  const SimulationResult r = run_simulation(builtin_scenario("double-start"));
  EXPECT_FALSE(r.violations.empty());
}

TEST(Simulation, OutageRecovers) {
  const SimulationResult r = run_simulation(builtin_scenario("consumer-outage"));
  EXPECT_TRUE(r.violations.empty());
  EXPECT_GE(r.timeouts, 1u);
  EXPECT_EQ(r.final_assignment.size(), 5u);
  bool deleted = false;
  for (const auto& e : r.events) deleted |= e.event == "delete" && e.consumer == 1u;
  EXPECT_TRUE(deleted);
}

TEST(Simulation, DriftIsSafe) {
  Scenario s = builtin_scenario("drift-25");
  s.ticks = 3000;
  const SimulationResult r = run_simulation(s);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_GT(r.reassignments, 10u);
  EXPECT_EQ(r.final_assignment.size(), s.partitions.size());
}

TEST(Simulation, Deterministic) {
  Scenario s = builtin_scenario("drift-25");
  s.ticks = 1000;
  std::ostringstream a, b;
  const auto ra = run_simulation(s, &a);
  const auto rb = run_simulation(s, &b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(ra.total_lag, rb.total_lag);
  EXPECT_EQ(ra.events.size(), rb.events.size());
}

TEST(Simulation, LagTraceHasOneLinePerTickPerPartition) {
  Scenario s = builtin_scenario("step-overload");
  s.ticks = 10;
  std::ostringstream os;
  run_simulation(s, &os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("tick") && j.contains("partition") && j.contains("lag") &&
                j.contains("paused") && j.contains("owner"));
    ++lines;
  }
  EXPECT_EQ(lines, 11u * 6u);
}

TEST(ParseScenario, FullDocument) {
  const Scenario s = parse_scenario(R"({
    "name": "custom", "capacity": 100, "ticks": 50, "algorithm": "MWF",
    "partitions": [{"id": "x", "speed": 40}, {"id": "y", "speed": 30, "lag": 5}],
    "initial_assignment": {"x": 0, "y": 1},
    "speed_changes": [{"tick": 10, "partition": "x", "speed": 90}],
    "drift": {"delta": 5, "period": 10, "seed": 3},
    "outages": [{"consumer": 1, "from": 20, "to": 30}],
    "ack_timeout": 12, "hysteresis": 2, "inject_double_start": false
  })");
  EXPECT_EQ(s.name, "custom");
  EXPECT_EQ(s.controller.capacity, 100.0);
  EXPECT_EQ(s.controller.algorithm, AlgorithmId::kMWF);
  EXPECT_EQ(s.partitions.size(), 2u);
  EXPECT_EQ(s.partitions[1].lag, 5.0);
  EXPECT_EQ(s.initial_assignment.owner(PartitionId("y")), 1u);
  ASSERT_EQ(s.speed_changes.size(), 1u);
  ASSERT_TRUE(s.drift);
  EXPECT_EQ(s.drift->period, 10);
  ASSERT_EQ(s.outages.size(), 1u);
  EXPECT_EQ(s.outages[0].to, 30);
  EXPECT_EQ(s.controller.ack_timeout_ticks, 12);
  EXPECT_EQ(s.controller.policy.hysteresis_cycles, 2);
  const SimulationResult r = run_simulation(s);
  EXPECT_EQ(r.total_lag.size(), 51u);
}

TEST(ParseScenario, BaseOverride) {
  const Scenario s = parse_scenario(R"({"base": "step-overload", "ticks": 7})");
  EXPECT_EQ(s.ticks, 7);
  EXPECT_EQ(s.partitions.size(), 6u);
}

TEST(ParseScenario, Errors) {
  for (const char* bad : {
           "not json",
           "[]",
           R"({"partitions": [{"id": "x"}]})",
           R"({"partitions": [{"id": "x", "speed": -1}]})",
           R"({"capacity": 10, "partitions": [{"id": "x", "speed": 11}]})",
           R"({"partitions": [{"id": "x", "speed": 1}], "initial_assignment": {"q": 0}})",
           R"({"algorithm": "XYZ"})",
           R"({"ticks": 1.5})",
           R"({"base": "nope"})",
           R"({"hysteresis": 0})",
       }) {
    try {
      parse_scenario(bad);
      ADD_FAILURE() << "accepted: " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kScenarioError) << bad;
    }
  }
}

}  // namespace
}  // namespace autoscale
