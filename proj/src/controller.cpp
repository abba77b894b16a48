#include "autoscale/controller.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "autoscale/error.hpp"
#include "autoscale/packing.hpp"

namespace autoscale {

void SimBrokerPort::create_consumer(ConsumerIndex k) { world_.add_consumer(k); }

void SimBrokerPort::send_control(ConsumerIndex k, ControlMessage msg) {
  world_.deliver(k, std::move(msg));
}

std::vector<Ack> SimBrokerPort::poll_acks() { return world_.take_acks(); }

std::optional<std::set<PartitionId>> SimBrokerPort::query_assignment(
    ConsumerIndex k) {
  auto it = world_.consumers().find(k);
  if (it == world_.consumers().end() || !it->second.reachable) return std::nullopt;
  return it->second.assigned;
}

void SimBrokerPort::delete_consumer(ConsumerIndex k) { world_.remove_consumer(k); }

StateDiff compute_diff(const Assignment& current,
                       const std::set<ConsumerIndex>& live,
                       const Assignment& desired) {
  StateDiff diff;
  const auto wanted = desired.consumers();
  for (ConsumerIndex k : wanted) {
    if (!live.count(k)) diff.create.push_back(k);
  }
  for (const auto& [p, k] : current.placement()) {
    if (desired.owner(p) != k) diff.stop[k].insert(p);
  }
  for (const auto& [p, k] : desired.placement()) {
    if (current.owner(p) != k) diff.start[k].insert(p);
  }
  for (ConsumerIndex k : live) {
    if (!wanted.count(k)) diff.decommission.push_back(k);
  }
  return diff;
}

void validate(const SentinelPolicy& policy) {
  if (policy.scale_down_margin < 1) {
    throw Error(ErrorCode::kInvalidSpec, "scale_down_margin must be >= 1");
  }
  if (policy.hysteresis_cycles < 1) {
    throw Error(ErrorCode::kInvalidSpec, "hysteresis_cycles must be >= 1");
  }
}

std::string_view to_string(Decision d) {
  return d == Decision::kHold ? "hold" : "reassign";
}

Sentinel::Sentinel(SentinelPolicy policy) : policy_(policy) { validate(policy_); }

Decision Sentinel::step(const GroupState& state, const Measurement& m, Capacity c) {
  bool fire = false;
  if (policy_.unassigned_enabled) {
    for (const auto& [p, s] : m.speeds()) {
      if (!state.assignment.owner(p)) fire = true;
    }
  }
  if (policy_.overload_enabled) {
    std::map<ConsumerIndex, double> load;
    for (const auto& [p, k] : state.assignment.placement()) {
      if (m.contains(p)) load[k] += m.speed(p);
    }
    for (const auto& [k, l] : load) {
      if (!fits(0.0, l, c)) fire = true;
    }
  }
  const std::size_t bound = lower_bound(m, c);
  if (policy_.scale_down_enabled) {
    const std::size_t live = state.live_consumers.size();
    const bool below = bound + static_cast<std::size_t>(policy_.scale_down_margin) <= live;
    const bool rearmed = !bound_at_reassign_ || bound < *bound_at_reassign_;
    if (below && rearmed) {
      if (++streak_ >= policy_.hysteresis_cycles) fire = true;
    } else {
      streak_ = 0;
    }
  }
  if (!fire) return Decision::kHold;
  streak_ = 0;
  bound_at_reassign_ = bound;
  return Decision::kReassign;
}

void write_event_jsonl(const ControlEvent& e, std::ostream& os) {
  nlohmann::ordered_json j;
  j["tick"] = e.tick;
  j["event"] = e.event;
  j["consumer"] = e.consumer ? nlohmann::ordered_json(*e.consumer) : nullptr;
  auto ps = nlohmann::ordered_json::array();
  for (const auto& p : e.partitions) ps.push_back(p.str());
  j["partitions"] = std::move(ps);
  j["token"] = e.token ? nlohmann::ordered_json(*e.token) : nullptr;
  os << j.dump() << '\n';
}

std::vector<Violation> check_event_log(const std::vector<ControlEvent>& log,
                                       const Assignment& initial) {
  std::map<PartitionId, ConsumerIndex> holder = initial.placement();
  std::vector<Violation> out;
  auto release_all = [&](ConsumerIndex k) {
    std::erase_if(holder, [&](const auto& kv) { return kv.second == k; });
  };
  for (const auto& e : log) {
    if (!e.consumer) continue;
    const ConsumerIndex k = *e.consumer;
    if (e.event == "start") {
      for (const auto& p : e.partitions) {
        auto it = holder.find(p);
        if (it != holder.end() && it->second != k) {
          std::ostringstream os;
          os << "start of " << p.str() << " on consumer " << k
             << " before consumer " << it->second << " acknowledged its stop";
          out.push_back({e.tick, os.str()});
        }
        holder[p] = k;
      }
    } else if (e.event == "stop_ack") {
      for (const auto& p : e.partitions) {
        auto it = holder.find(p);
        if (it != holder.end() && it->second == k) holder.erase(it);
      }
    } else if (e.event == "delete" || e.event == "decommission_ack") {
      release_all(k);
    }
  }
  return out;
}

namespace {

std::string ack_event(ControlKind k) { return std::string(to_string(k)) + "_ack"; }

void push_event(std::vector<ControlEvent>* log, std::int64_t tick, std::string event,
                std::optional<ConsumerIndex> k, const std::set<PartitionId>& ps,
                std::optional<std::uint64_t> token) {
  if (!log) return;
  log->push_back({tick, std::move(event), k, {ps.begin(), ps.end()}, token});
}

// Folds one acknowledged message into the perceived state.
void apply_ack(GroupState& state, const PendingAck& sent) {
  switch (sent.kind) {
    case ControlKind::kStopConsuming:
      for (const auto& p : sent.partitions) {
        if (state.assignment.owner(p) == sent.consumer) state.assignment.erase(p);
      }
      break;
    case ControlKind::kStartConsuming:
      for (const auto& p : sent.partitions) state.assignment.assign(p, sent.consumer);
      break;
    case ControlKind::kDecommission:
      break;
  }
}

void delete_consumer(GroupState& state, BrokerPort& port, ConsumerIndex k,
                     std::vector<ControlEvent>* log) {
  port.delete_consumer(k);
  state.live_consumers.erase(k);
  std::erase_if(state.pending_acks,
                [&](const auto& kv) { return kv.second.consumer == k; });
  Assignment kept;
  for (const auto& [p, owner] : state.assignment.placement()) {
    if (owner != k) kept.assign(p, owner);
  }
  state.assignment = std::move(kept);
  push_event(log, port.now_tick(), "delete", k, {}, std::nullopt);
}

}  // namespace

GroupState synchronize(const GroupState& perceived, BrokerPort& port,
                       std::vector<ControlEvent>* log) {
  GroupState state = perceived;
  const std::int64_t now = port.now_tick();
  for (const Ack& ack : port.poll_acks()) {
    auto it = state.pending_acks.find(ack.token);
    if (it == state.pending_acks.end()) continue;
    const PendingAck sent = it->second;
    state.pending_acks.erase(it);
    push_event(log, now, ack_event(sent.kind), sent.consumer, sent.partitions,
               ack.token);
    apply_ack(state, sent);
    if (sent.kind == ControlKind::kDecommission) {
      delete_consumer(state, port, sent.consumer, log);
    }
  }

  GroupState out;
  out.next_token = state.next_token;
  for (ConsumerIndex k : state.live_consumers) {
    auto reported = port.query_assignment(k);
    if (!reported) {
      port.delete_consumer(k);
      push_event(log, now, "delete", k, {}, std::nullopt);
      continue;
    }
    out.live_consumers.insert(k);
    for (const auto& p : *reported) {
      if (!out.assignment.owner(p)) out.assignment.assign(p, k);
    }
  }
  for (const auto& [token, sent] : state.pending_acks) {
    if (!out.live_consumers.count(sent.consumer)) continue;
    out.pending_acks.emplace(token, sent);
    if (sent.kind == ControlKind::kStartConsuming) {
      for (const auto& p : sent.partitions) {
        if (!out.assignment.owner(p)) out.assignment.assign(p, sent.consumer);
      }
    }
  }
  std::set<PartitionId> changed;
  for (const auto& [p, k] : perceived.assignment.placement()) {
    if (out.assignment.owner(p) != k) changed.insert(p);
  }
  for (const auto& [p, k] : out.assignment.placement()) {
    if (perceived.assignment.owner(p) != k) changed.insert(p);
  }
  push_event(log, now, "synchronize", std::nullopt, changed, std::nullopt);
  return out;
}

DiffExecutor::DiffExecutor(BrokerPort& port, GroupState& state,
                           std::vector<ControlEvent>& log, Options options)
    : port_(port), state_(state), log_(log), options_(options) {
  if (options_.ack_timeout_ticks < 1) {
    throw Error(ErrorCode::kInvalidSpec, "ack timeout must be >= 1 tick");
  }
}

std::uint64_t DiffExecutor::send(ConsumerIndex k, ControlKind kind,
                                 std::set<PartitionId> ps) {
  const std::uint64_t token = state_.next_token++;
  const std::int64_t now = port_.now_tick();
  push_event(&log_, now, std::string(to_string(kind)), k, ps, token);
  state_.pending_acks[token] = {k, kind, ps, now};
  outstanding_.insert(token);
  port_.send_control(k, {kind, std::move(ps), token});
  return token;
}

void DiffExecutor::send_starts(
    const std::map<ConsumerIndex, std::set<PartitionId>>& starts) {
  for (const auto& [k, ps] : starts) {
    if (!ps.empty()) send(k, ControlKind::kStartConsuming, ps);
  }
}

void DiffExecutor::begin(const StateDiff& diff) {
  status_ = Status::kRunning;
  waiting_start_.clear();
  outstanding_.clear();
  decommission_ = diff.decommission;
  decommission_sent_ = false;

  const std::int64_t now = port_.now_tick();
  for (ConsumerIndex k : diff.create) {
    port_.create_consumer(k);
    state_.live_consumers.insert(k);
    push_event(&log_, now, "create", k, {}, std::nullopt);
  }
  std::map<ConsumerIndex, std::set<PartitionId>> immediate;
  for (const auto& [k, ps] : diff.start) {
    for (const auto& p : ps) {
      const auto old = state_.assignment.owner(p);
      if (!old || *old == k || options_.inject_double_start) {
        immediate[k].insert(p);
      } else {
        waiting_start_[p] = k;
      }
    }
  }
  for (const auto& [k, ps] : diff.stop) {
    if (!ps.empty()) send(k, ControlKind::kStopConsuming, ps);
  }
  send_starts(immediate);
  poll();
}

void DiffExecutor::on_ack(const Ack& ack,
                          std::map<ConsumerIndex, std::set<PartitionId>>& unblocked) {
  auto it = state_.pending_acks.find(ack.token);
  if (it == state_.pending_acks.end()) return;
  const PendingAck sent = it->second;
  state_.pending_acks.erase(it);
  outstanding_.erase(ack.token);
  push_event(&log_, port_.now_tick(), ack_event(sent.kind), sent.consumer,
             sent.partitions, ack.token);
  apply_ack(state_, sent);
  if (sent.kind == ControlKind::kStopConsuming) {
    for (const auto& p : sent.partitions) {
      auto w = waiting_start_.find(p);
      if (w == waiting_start_.end()) continue;
      unblocked[w->second].insert(p);
      waiting_start_.erase(w);
    }
  } else if (sent.kind == ControlKind::kDecommission) {
    delete_consumer(state_, port_, sent.consumer, &log_);
  }
}

DiffExecutor::Status DiffExecutor::poll() {
  if (status_ != Status::kRunning) return status_;
  std::map<ConsumerIndex, std::set<PartitionId>> unblocked;
  for (const Ack& ack : port_.poll_acks()) on_ack(ack, unblocked);
  send_starts(unblocked);

  if (outstanding_.empty() && waiting_start_.empty()) {
    if (!decommission_sent_) {
      decommission_sent_ = true;
      for (ConsumerIndex k : decommission_) send(k, ControlKind::kDecommission, {});
    }
    if (outstanding_.empty()) {
      status_ = Status::kDone;
      return status_;
    }
  }

  const std::int64_t now = port_.now_tick();
  for (std::uint64_t token : outstanding_) {
    const PendingAck& sent = state_.pending_acks.at(token);
    if (now - sent.sent_at >= options_.ack_timeout_ticks) {
      push_event(&log_, now, "ack_timeout", sent.consumer, sent.partitions, token);
      status_ = Status::kTimedOut;
      waiting_start_.clear();
      outstanding_.clear();
      return status_;
    }
  }
  return status_;
}

std::vector<ControlEvent> apply_diff(const StateDiff& diff, BrokerPort& port,
                                     GroupState& state,
                                     const std::function<void()>& pump,
                                     std::int64_t ack_timeout_ticks) {
  std::vector<ControlEvent> log;
  DiffExecutor exec(port, state, log, {ack_timeout_ticks, false});
  exec.begin(diff);
  while (exec.status() == DiffExecutor::Status::kRunning) {
    pump();
    exec.poll();
  }
  if (exec.status() == DiffExecutor::Status::kTimedOut) {
    const ControlEvent& e = log.back();
    std::ostringstream os;
    os << "no ack from consumer " << e.consumer.value_or(0) << " for token "
       << e.token.value_or(0);
    throw Error(ErrorCode::kAckTimeout, os.str());
  }
  return log;
}

std::string_view to_string(ControllerPhase p) {
  switch (p) {
    case ControllerPhase::kSynchronize: return "synchronize";
    case ControllerPhase::kSentinel: return "sentinel";
    case ControllerPhase::kGroupManagement: return "group-management";
  }
  return "?";
}

Controller::Controller(ControllerConfig config, BrokerPort& port, GroupState initial)
    : config_(config),
      port_(port),
      capacity_(config.capacity),
      sentinel_(config.policy),
      state_(std::move(initial)),
      executor_(port, state_, log_,
                {config.ack_timeout_ticks, config.inject_double_start}) {}

void Controller::run_synchronize() { state_ = synchronize(state_, port_, &log_); }

void Controller::reassign(const Measurement& m) {
  // Window averages can land a hair above capacity; a partition cannot be
  // served faster than one consumer anyway.
  std::map<PartitionId, double> speeds;
  for (const auto& [p, s] : m.speeds()) speeds.emplace(p, std::min(s, capacity_.value()));
  const Measurement clamped(std::move(speeds), m.taken_at());

  const Assignment desired = pack(config_.algorithm, clamped, state_.assignment, capacity_);
  ++reassignments_;
  push_event(&log_, port_.now_tick(), "reassign", std::nullopt, {}, std::nullopt);
  const StateDiff diff = compute_diff(state_.assignment, state_.live_consumers, desired);
  if (diff.empty()) {
    phase_ = ControllerPhase::kSentinel;
    return;
  }
  executor_.begin(diff);
  phase_ = ControllerPhase::kGroupManagement;
  if (executor_.status() == DiffExecutor::Status::kDone) {
    last_done_ = port_.now_tick();
    phase_ = ControllerPhase::kSynchronize;
  } else if (executor_.status() == DiffExecutor::Status::kTimedOut) {
    ++timeouts_;
    phase_ = ControllerPhase::kSynchronize;
  }
}

void Controller::step(const std::optional<Measurement>& published) {
  if (phase_ == ControllerPhase::kGroupManagement) {
    const auto status = executor_.poll();
    if (status == DiffExecutor::Status::kRunning) return;
    if (status == DiffExecutor::Status::kDone) {
      last_done_ = port_.now_tick();
    } else {
      ++timeouts_;
    }
    phase_ = ControllerPhase::kSynchronize;
  }
  if (phase_ == ControllerPhase::kSynchronize) {
    run_synchronize();
    phase_ = ControllerPhase::kSentinel;
  }
  if (published && sentinel_.step(state_, *published, capacity_) == Decision::kReassign) {
    reassign(*published);
  }
}

}  // namespace autoscale
