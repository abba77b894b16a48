#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autoscale/model.hpp"
#include "autoscale/monitor.hpp"

namespace autoscale {

struct PartitionState {
  PartitionId id;
  double total_bytes = 0.0;
  double consumed_bytes = 0.0;
  double true_speed = 0.0;
  bool paused = true;  // no consumer owns it

  double lag() const { return total_bytes - consumed_bytes; }
};

enum class ControlKind { kStopConsuming, kStartConsuming, kDecommission };

std::string_view to_string(ControlKind k);

struct ControlMessage {
  ControlKind kind = ControlKind::kStopConsuming;
  std::set<PartitionId> partitions;
  std::uint64_t ack_token = 0;
};

struct Ack {
  std::uint64_t token = 0;
  ConsumerIndex consumer = 0;
  ControlKind kind = ControlKind::kStopConsuming;
  std::int64_t tick = 0;
};

struct ConsumerConfig {
  double capacity = 2.3e6;
  // A gather cycle ends once this many bytes were fetched or after
  // wait_time_ticks ticks, whichever comes first; the metadata inbox is
  // read at the end of each cycle.
  double batch_bytes = 4.6e6;
  std::int64_t wait_time_ticks = 3;
};

struct ConsumerState {
  ConsumerIndex index = 0;
  std::set<PartitionId> assigned;
  ConsumerConfig config;
  std::deque<ControlMessage> inbox;
  double gathered = 0.0;
  std::int64_t cycle_ticks = 0;
  bool decommissioned = false;
  bool reachable = true;
};

struct Violation {
  std::int64_t tick = 0;
  std::string detail;
};

// Discrete-time broker: producers append to partitions, consumers drain the
// partitions they own up to capacity per tick and read their control inbox
// at the end of every gather cycle.
class World {
 public:
  explicit World(ConsumerConfig consumer_defaults = {}, MonitorConfig monitor = {});

  void add_partition(const PartitionId& p, double speed, double lag = 0.0);
  void set_speed(const PartitionId& p, double speed);

  void add_consumer(ConsumerIndex k);
  // Removes the consumer; whatever it still owned becomes unowned.
  void remove_consumer(ConsumerIndex k);
  void set_reachable(ConsumerIndex k, bool reachable);
  // Direct ownership change outside the control protocol (initial state).
  void seed_assignment(const Assignment& a);

  void deliver(ConsumerIndex k, ControlMessage msg);
  std::vector<Ack> take_acks();

  // One step: production, drain, inbox processing, monitor sampling, then the
  // mutual-exclusion check. Returns the Measurement if the monitor published.
  std::optional<Measurement> tick(double dt = 1.0);

  std::int64_t now_tick() const noexcept { return tick_; }
  double now() const noexcept { return now_; }

  const std::map<PartitionId, PartitionState>& partitions() const noexcept {
    return partitions_;
  }
  const std::map<ConsumerIndex, ConsumerState>& consumers() const noexcept {
    return consumers_;
  }
  std::optional<ConsumerIndex> owner(const PartitionId& p) const;
  double total_lag() const;
  double total_speed() const;
  // Ownership as the consumers see it.
  Assignment actual_assignment() const;

  const Monitor& monitor() const noexcept { return monitor_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  void drain(ConsumerState& c, double dt);
  void process_inbox(ConsumerState& c);
  void refresh_paused();
  void check_exclusion();
  std::map<PartitionId, double> sizes() const;

  ConsumerConfig defaults_;
  Monitor monitor_;
  bool started_ = false;
  std::int64_t tick_ = 0;
  double now_ = 0.0;
  std::map<PartitionId, PartitionState> partitions_;
  std::map<ConsumerIndex, ConsumerState> consumers_;
  std::vector<Ack> acks_;
  std::vector<Violation> violations_;
};

}  // namespace autoscale
