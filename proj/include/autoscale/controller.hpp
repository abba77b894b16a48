#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "autoscale/algorithm.hpp"
#include "autoscale/broker_sim.hpp"
#include "autoscale/model.hpp"

namespace autoscale {

// What the controller needs from a broker. The simulator implements it; a
// real-broker adapter would too.
class BrokerPort {
 public:
  virtual ~BrokerPort() = default;
  virtual void create_consumer(ConsumerIndex k) = 0;
  virtual void send_control(ConsumerIndex k, ControlMessage msg) = 0;
  virtual std::vector<Ack> poll_acks() = 0;
  // nullopt when the consumer cannot be reached.
  virtual std::optional<std::set<PartitionId>> query_assignment(ConsumerIndex k) = 0;
  virtual void delete_consumer(ConsumerIndex k) = 0;
  virtual std::int64_t now_tick() const = 0;
};

class SimBrokerPort final : public BrokerPort {
 public:
  explicit SimBrokerPort(World& world) : world_(world) {}

  void create_consumer(ConsumerIndex k) override;
  void send_control(ConsumerIndex k, ControlMessage msg) override;
  std::vector<Ack> poll_acks() override;
  std::optional<std::set<PartitionId>> query_assignment(ConsumerIndex k) override;
  void delete_consumer(ConsumerIndex k) override;
  std::int64_t now_tick() const override { return world_.now_tick(); }

 private:
  World& world_;
};

struct PendingAck {
  ConsumerIndex consumer = 0;
  ControlKind kind = ControlKind::kStopConsuming;
  std::set<PartitionId> partitions;
  std::int64_t sent_at = 0;
};

struct GroupState {
  Assignment assignment;
  std::set<ConsumerIndex> live_consumers;
  std::map<std::uint64_t, PendingAck> pending_acks;
  std::uint64_t next_token = 1;
};

struct StateDiff {
  std::vector<ConsumerIndex> create;
  std::map<ConsumerIndex, std::set<PartitionId>> stop;
  std::map<ConsumerIndex, std::set<PartitionId>> start;
  std::vector<ConsumerIndex> decommission;

  bool empty() const {
    return create.empty() && stop.empty() && start.empty() && decommission.empty();
  }
  friend bool operator==(const StateDiff&, const StateDiff&) = default;
};

StateDiff compute_diff(const Assignment& current,
                       const std::set<ConsumerIndex>& live,
                       const Assignment& desired);

struct SentinelPolicy {
  bool unassigned_enabled = true;
  bool overload_enabled = true;
  bool scale_down_enabled = true;
  int scale_down_margin = 1;
  int hysteresis_cycles = 3;
};

void validate(const SentinelPolicy& policy);

enum class Decision { kHold, kReassign };

std::string_view to_string(Decision d);

// Exit conditions, checked on every monitor publication:
//   (a) a measured partition has no owner;
//   (b) some consumer's measured load exceeds capacity;
//   (c) the lower bound sits at least `margin` below the live consumer count
//       for `hysteresis_cycles` calls in a row.
// After a reassignment, (c) only counts again once the lower bound has
// dropped below its value at that reassignment; otherwise a packing that
// cannot reach the bound would be retried forever.
class Sentinel {
 public:
  explicit Sentinel(SentinelPolicy policy = {});

  Decision step(const GroupState& state, const Measurement& m, Capacity c);

  int streak() const noexcept { return streak_; }
  const SentinelPolicy& policy() const noexcept { return policy_; }

 private:
  SentinelPolicy policy_;
  int streak_ = 0;
  std::optional<std::size_t> bound_at_reassign_;
};

struct ControlEvent {
  std::int64_t tick = 0;
  std::string event;
  std::optional<ConsumerIndex> consumer;
  std::vector<PartitionId> partitions;
  std::optional<std::uint64_t> token;
};

void write_event_jsonl(const ControlEvent& e, std::ostream& os);

// Replays the log and reports every start issued for a partition that
// another consumer still holds (no stop acknowledgment or deletion yet).
std::vector<Violation> check_event_log(const std::vector<ControlEvent>& log,
                                       const Assignment& initial);

// Queries every live consumer. Reports win over perception; unreachable
// consumers are deleted and their partitions orphaned. Acks waiting in the
// port are consumed first, and messages still in flight to a reachable
// consumer count as delivered so a later diff orders itself behind them.
GroupState synchronize(const GroupState& perceived, BrokerPort& port,
                       std::vector<ControlEvent>* log = nullptr);

// Drives one Group Management phase: creates consumers, sends stops, waits
// for each stop ack before starting the partition elsewhere, starts
// never-owned partitions at once and decommissions emptied consumers after
// every other ack. Deletes a consumer once its decommission is acked.
class DiffExecutor {
 public:
  enum class Status { kRunning, kDone, kTimedOut };

  struct Options {
    std::int64_t ack_timeout_ticks = 30;
    bool inject_double_start = false;
  };

  // `state` is updated as acks arrive; `log` receives every event.
  DiffExecutor(BrokerPort& port, GroupState& state, std::vector<ControlEvent>& log,
               Options options);

  void begin(const StateDiff& diff);
  // Reads acks and sends whatever they unblocked.
  Status poll();
  Status status() const noexcept { return status_; }

 private:
  std::uint64_t send(ConsumerIndex k, ControlKind kind, std::set<PartitionId> ps);
  void send_starts(const std::map<ConsumerIndex, std::set<PartitionId>>& starts);
  void on_ack(const Ack& ack, std::map<ConsumerIndex, std::set<PartitionId>>& unblocked);

  BrokerPort& port_;
  GroupState& state_;
  std::vector<ControlEvent>& log_;
  Options options_;
  Status status_ = Status::kDone;
  std::map<PartitionId, ConsumerIndex> waiting_start_;
  std::vector<ConsumerIndex> decommission_;
  std::set<std::uint64_t> outstanding_;
  bool decommission_sent_ = false;
};

// Synchronous group management for tests and one-shot use: applies the diff
// through the port, calling `pump` (which should advance the broker) between
// polls. Throws AckTimeout when an ack does not arrive in time.
std::vector<ControlEvent> apply_diff(const StateDiff& diff, BrokerPort& port,
                                     GroupState& state,
                                     const std::function<void()>& pump,
                                     std::int64_t ack_timeout_ticks = 30);

enum class ControllerPhase { kSynchronize, kSentinel, kGroupManagement };

std::string_view to_string(ControllerPhase p);

struct ControllerConfig {
  AlgorithmId algorithm = AlgorithmId::kMBF;
  SentinelPolicy policy;
  double capacity = 2.3e6;
  std::int64_t ack_timeout_ticks = 30;
  // Test fixture: sends every start without waiting for the stop ack.
  bool inject_double_start = false;
};

// Synchronize -> Sentinel -> Reassign -> Group Management -> Synchronize.
class Controller {
 public:
  Controller(ControllerConfig config, BrokerPort& port, GroupState initial);

  // Runs after every world tick with the monitor's publication, if any.
  void step(const std::optional<Measurement>& published);

  ControllerPhase phase() const noexcept { return phase_; }
  const GroupState& state() const noexcept { return state_; }
  const std::vector<ControlEvent>& log() const noexcept { return log_; }
  std::size_t reassignments() const noexcept { return reassignments_; }
  std::size_t timeouts() const noexcept { return timeouts_; }
  std::optional<std::int64_t> last_rebalance_done() const noexcept {
    return last_done_;
  }

 private:
  void run_synchronize();
  void reassign(const Measurement& m);

  ControllerConfig config_;
  BrokerPort& port_;
  Capacity capacity_;
  Sentinel sentinel_;
  GroupState state_;
  std::vector<ControlEvent> log_;
  DiffExecutor executor_;
  ControllerPhase phase_ = ControllerPhase::kSynchronize;
  std::size_t reassignments_ = 0;
  std::size_t timeouts_ = 0;
  std::optional<std::int64_t> last_done_;
};

}  // namespace autoscale
