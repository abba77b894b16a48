#include "autoscale/simulation.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "autoscale/error.hpp"
#include "autoscale/stream.hpp"

namespace autoscale {
namespace {

using nlohmann::json;

[[noreturn]] void scenario_error(const std::string& what) {
  throw Error(ErrorCode::kScenarioError, what);
}

struct Builder {
  Scenario s;
  double c;

  explicit Builder(std::string name) {
    s.name = std::move(name);
    c = s.controller.capacity;
  }
  // Partitions in load units of capacity.
  void consumer(ConsumerIndex k, std::vector<std::pair<std::string, double>> parts) {
    for (const auto& [id, f] : parts) {
      s.partitions.push_back({PartitionId(id), f * c, 0.0});
      s.initial_assignment.assign(PartitionId(id), k);
    }
  }
  void change(std::int64_t tick, const std::string& id, double f) {
    s.speed_changes.push_back({tick, PartitionId(id), f * c});
  }
};

Scenario steady_60pct() {
  Builder b("steady-60pct");
  for (ConsumerIndex k = 0; k < 5; ++k) {
    std::vector<std::pair<std::string, double>> parts;
    for (int j = 0; j < 5; ++j) {
      parts.emplace_back("steady:" + std::to_string(k * 5 + j), 0.12);
    }
    b.consumer(k, parts);
  }
  return b.s;
}

Scenario step_overload() {
  Builder b("step-overload");
  b.consumer(0, {{"a", 0.5}, {"b", 0.3}});
  b.consumer(1, {{"c", 0.4}, {"d", 0.2}});
  b.consumer(2, {{"e", 0.5}, {"f", 0.2}});
  b.change(300, "a", 0.9);
  b.s.ticks = 1200;
  return b.s;
}

Scenario drain_to_zero() {
  Builder b("drain-to-zero");
  for (ConsumerIndex k = 0; k < 4; ++k) {
    const std::string x = "drain:" + std::to_string(2 * k);
    const std::string y = "drain:" + std::to_string(2 * k + 1);
    b.consumer(k, {{x, 0.45}, {y, 0.35}});
    b.change(300, x, 0.001);
    b.change(300, y, 0.001);
  }
  b.s.ticks = 1200;
  return b.s;
}

Scenario drift_25() {
  Builder b("drift-25");
  StreamSpec spec;
  spec.partitions = 40;
  spec.length = 1;
  spec.capacity = b.c;
  spec.seed = 7;
  const Stream first = generate(spec);
  for (const auto& [p, speed] : first.measurements.front().speeds()) {
    b.s.partitions.push_back({p, speed, 0.0});
  }
  b.s.drift = Drift{25.0, 30, 7};
  return b.s;
}

Scenario double_start() {
  Scenario s = step_overload();
  s.name = "double-start";
  s.controller.inject_double_start = true;
  return s;
}

Scenario consumer_outage() {
  Builder b("consumer-outage");
  b.consumer(0, {{"a", 0.6}, {"b", 0.3}});
  b.consumer(1, {{"c", 0.3}, {"d", 0.3}});
  b.consumer(2, {{"e", 0.5}});
  b.change(300, "a", 0.9);
  b.s.outages.push_back({1, 200, -1});
  b.s.ticks = 1200;
  return b.s;
}

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) scenario_error(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

std::int64_t integer(const json& j, const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    scenario_error(std::string(key) + " must be an integer");
  }
  return j.at(key).get<std::int64_t>();
}

bool boolean(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) scenario_error(std::string(key) + " must be a boolean");
  return j.at(key).get<bool>();
}

void apply_drift(World& world, const Drift& d, double c, std::mt19937_64& rng) {
  for (const auto& [id, p] : world.partitions()) {
    const double phi = -d.delta + 2.0 * d.delta * unit_uniform(rng());
    world.set_speed(id, std::clamp(p.true_speed + phi / 100.0 * c, 0.0, c));
  }
}

void trace_tick(const World& world, std::ostream& os) {
  for (const auto& [id, p] : world.partitions()) {
    nlohmann::ordered_json j;
    j["tick"] = world.now_tick();
    j["partition"] = id.str();
    j["lag"] = p.lag();
    j["paused"] = p.paused;
    const auto owner = world.owner(id);
    j["owner"] = owner ? nlohmann::ordered_json(*owner) : nullptr;
    os << j.dump() << '\n';
  }
}

}  // namespace

void validate(const Scenario& s) {
  const Capacity c(s.controller.capacity);
  validate(s.controller.policy);
  if (s.ticks < 0) scenario_error("ticks must be >= 0");
  if (s.controller.ack_timeout_ticks < 1) scenario_error("ack timeout must be >= 1");
  std::set<PartitionId> ids;
  for (const auto& p : s.partitions) {
    if (!ids.insert(p.id).second) scenario_error("duplicate partition " + p.id.str());
    if (!(p.speed >= 0.0) || p.speed > c.value()) {
      scenario_error("speed of " + p.id.str() + " must lie in [0, capacity]");
    }
    if (!(p.lag >= 0.0)) scenario_error("lag of " + p.id.str() + " must be >= 0");
  }
  for (const auto& [p, k] : s.initial_assignment.placement()) {
    if (!ids.count(p)) scenario_error("initial assignment names unknown " + p.str());
  }
  for (const auto& ch : s.speed_changes) {
    if (!ids.count(ch.partition)) {
      scenario_error("speed change names unknown " + ch.partition.str());
    }
    if (!(ch.speed >= 0.0) || ch.speed > c.value()) {
      scenario_error("speed change for " + ch.partition.str() + " out of range");
    }
  }
  if (s.drift) {
    if (!(s.drift->delta >= 0.0 && s.drift->delta <= 100.0)) {
      scenario_error("drift delta must lie in [0, 100]");
    }
    if (s.drift->period < 1) scenario_error("drift period must be >= 1");
  }
  for (const auto& o : s.outages) {
    if (o.from < 0 || (o.to >= 0 && o.to < o.from)) scenario_error("bad outage window");
  }
}

std::vector<std::string> builtin_scenario_names() {
  return {"steady-60pct", "step-overload", "drain-to-zero",
          "drift-25",     "double-start",  "consumer-outage"};
}

Scenario builtin_scenario(std::string_view name) {
  if (name == "steady-60pct") return steady_60pct();
  if (name == "step-overload") return step_overload();
  if (name == "drain-to-zero") return drain_to_zero();
  if (name == "drift-25") return drift_25();
  if (name == "double-start") return double_start();
  if (name == "consumer-outage") return consumer_outage();
  scenario_error("unknown scenario '" + std::string(name) + "'");
}

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    scenario_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) scenario_error("scenario must be a JSON object");
  try {
    Scenario s;
    if (j.contains("base")) s = builtin_scenario(j.at("base").get<std::string>());
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    s.controller.capacity = number(j, "capacity", s.controller.capacity);
    s.consumer.capacity = s.controller.capacity;
    s.ticks = integer(j, "ticks", s.ticks);
    if (j.contains("algorithm")) {
      auto a = parse_algorithm(j.at("algorithm").get<std::string>());
      if (!a) scenario_error("unknown algorithm");
      s.controller.algorithm = *a;
    }
    s.controller.ack_timeout_ticks =
        integer(j, "ack_timeout", s.controller.ack_timeout_ticks);
    s.controller.inject_double_start =
        boolean(j, "inject_double_start", s.controller.inject_double_start);
    auto& pol = s.controller.policy;
    pol.hysteresis_cycles =
        static_cast<int>(integer(j, "hysteresis", pol.hysteresis_cycles));
    pol.scale_down_margin =
        static_cast<int>(integer(j, "scale_down_margin", pol.scale_down_margin));
    pol.unassigned_enabled = boolean(j, "unassigned_enabled", pol.unassigned_enabled);
    pol.overload_enabled = boolean(j, "overload_enabled", pol.overload_enabled);
    pol.scale_down_enabled = boolean(j, "scale_down_enabled", pol.scale_down_enabled);
    s.consumer.batch_bytes = number(j, "batch_bytes", s.consumer.batch_bytes);
    s.consumer.wait_time_ticks =
        integer(j, "wait_time_ticks", s.consumer.wait_time_ticks);
    s.monitor.sampling_period = number(j, "sampling_period", s.monitor.sampling_period);
    s.monitor.horizon = number(j, "horizon", s.monitor.horizon);
    s.monitor.publish_period = number(j, "publish_period", s.monitor.publish_period);

    if (j.contains("partitions")) {
      s.partitions.clear();
      for (const auto& p : j.at("partitions")) {
        s.partitions.push_back({PartitionId(p.at("id").get<std::string>()),
                                p.at("speed").get<double>(), number(p, "lag", 0.0)});
      }
    }
    if (j.contains("initial_assignment")) {
      s.initial_assignment = Assignment();
      for (const auto& [id, k] : j.at("initial_assignment").items()) {
        s.initial_assignment.assign(PartitionId(id), k.get<ConsumerIndex>());
      }
    }
    if (j.contains("speed_changes")) {
      s.speed_changes.clear();
      for (const auto& ch : j.at("speed_changes")) {
        s.speed_changes.push_back({ch.at("tick").get<std::int64_t>(),
                                   PartitionId(ch.at("partition").get<std::string>()),
                                   ch.at("speed").get<double>()});
      }
    }
    if (j.contains("drift")) {
      const auto& d = j.at("drift");
      if (d.is_null()) {
        s.drift.reset();
      } else {
        s.drift = Drift{number(d, "delta", 0.0), integer(d, "period", 30),
                        static_cast<std::uint64_t>(integer(d, "seed", 1))};
      }
    }
    if (j.contains("outages")) {
      s.outages.clear();
      for (const auto& o : j.at("outages")) {
        s.outages.push_back({o.at("consumer").get<ConsumerIndex>(),
                             o.at("from").get<std::int64_t>(), integer(o, "to", -1)});
      }
    }
    validate(s);
    return s;
  } catch (const json::exception& e) {
    scenario_error(std::string("malformed scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kScenarioError) throw;
    scenario_error(e.what());
  }
}

Scenario read_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  return parse_scenario(text.str());
}

SimulationResult run_simulation(const Scenario& s, std::ostream* lag_trace) {
  validate(s);
  ConsumerConfig consumer = s.consumer;
  consumer.capacity = s.controller.capacity;
  World world(consumer, s.monitor);
  for (const auto& p : s.partitions) world.add_partition(p.id, p.speed, p.lag);
  world.seed_assignment(s.initial_assignment);

  SimBrokerPort port(world);
  GroupState initial;
  initial.assignment = s.initial_assignment;
  initial.live_consumers = s.initial_assignment.consumers();
  Controller controller(s.controller, port, initial);

  std::mt19937_64 rng(s.drift ? s.drift->seed : 0);
  SimulationResult r;
  r.total_lag.push_back(world.total_lag());
  r.consumers.push_back(world.consumers().size());
  if (lag_trace) trace_tick(world, *lag_trace);

  for (std::int64_t t = 0; t < s.ticks; ++t) {
    for (const auto& ch : s.speed_changes) {
      if (ch.tick == t) world.set_speed(ch.partition, ch.speed);
    }
    if (s.drift && t > 0 && t % s.drift->period == 0) {
      apply_drift(world, *s.drift, s.controller.capacity, rng);
    }
    for (const auto& o : s.outages) {
      if (t == o.from) world.set_reachable(o.consumer, false);
      if (t == o.to) world.set_reachable(o.consumer, true);
    }
    const auto published = world.tick();
    controller.step(published);
    r.total_lag.push_back(world.total_lag());
    r.consumers.push_back(world.consumers().size());
    if (lag_trace) trace_tick(world, *lag_trace);
  }

  r.events = controller.log();
  r.violations = world.violations();
  for (auto& v : check_event_log(r.events, s.initial_assignment)) {
    r.violations.push_back(std::move(v));
  }
  std::stable_sort(r.violations.begin(), r.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.tick < b.tick; });
  r.reassignments = controller.reassignments();
  r.timeouts = controller.timeouts();
  r.last_rebalance_done = controller.last_rebalance_done();
  r.final_assignment = world.actual_assignment();
  r.total_speed = world.total_speed();
  return r;
}

bool lag_adequate(const SimulationResult& r) {
  if (r.total_lag.empty()) return true;
  const auto from = static_cast<std::size_t>(r.last_rebalance_done.value_or(0));
  if (from >= r.total_lag.size()) return true;
  const double ceiling = r.total_lag[from] + r.total_speed;
  for (std::size_t t = from; t < r.total_lag.size(); ++t) {
    if (r.total_lag[t] > ceiling * (1.0 + 1e-12)) return false;
  }
  return true;
}

}  // namespace autoscale
