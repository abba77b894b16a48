#include "autoscale/broker_sim.hpp"

#include <algorithm>
#include <sstream>

#include "autoscale/error.hpp"

namespace autoscale {

std::string_view to_string(ControlKind k) {
  switch (k) {
    case ControlKind::kStopConsuming: return "stop";
    case ControlKind::kStartConsuming: return "start";
    case ControlKind::kDecommission: return "decommission";
  }
  return "?";
}

World::World(ConsumerConfig consumer_defaults, MonitorConfig monitor)
    : defaults_(consumer_defaults), monitor_(monitor) {
  Capacity check(defaults_.capacity);
  (void)check;
  if (!(defaults_.batch_bytes > 0.0) || defaults_.wait_time_ticks < 1) {
    throw Error(ErrorCode::kInvalidSpec,
                "batch_bytes must be > 0 and wait_time_ticks >= 1");
  }
}

void World::add_partition(const PartitionId& p, double speed, double lag) {
  if (partitions_.count(p)) {
    throw Error(ErrorCode::kScenarioError, "duplicate partition " + p.str());
  }
  if (!(speed >= 0.0) || !(lag >= 0.0)) {
    throw Error(ErrorCode::kScenarioError, "negative speed or lag for " + p.str());
  }
  PartitionState s;
  s.id = p;
  s.true_speed = speed;
  s.total_bytes = lag;
  partitions_.emplace(p, s);
}

void World::set_speed(const PartitionId& p, double speed) {
  auto it = partitions_.find(p);
  if (it == partitions_.end()) {
    throw Error(ErrorCode::kUnknownPartition, "unknown partition " + p.str());
  }
  if (!(speed >= 0.0)) {
    throw Error(ErrorCode::kScenarioError, "negative speed for " + p.str());
  }
  it->second.true_speed = speed;
}

void World::add_consumer(ConsumerIndex k) {
  if (consumers_.count(k)) {
    throw Error(ErrorCode::kInconsistentInput,
                "consumer " + std::to_string(k) + " already exists");
  }
  ConsumerState c;
  c.index = k;
  c.config = defaults_;
  consumers_.emplace(k, std::move(c));
}

void World::remove_consumer(ConsumerIndex k) {
  consumers_.erase(k);
  refresh_paused();
}

void World::set_reachable(ConsumerIndex k, bool reachable) {
  auto it = consumers_.find(k);
  if (it != consumers_.end()) it->second.reachable = reachable;
}

void World::seed_assignment(const Assignment& a) {
  for (const auto& [p, k] : a.placement()) {
    if (!partitions_.count(p)) {
      throw Error(ErrorCode::kScenarioError, "unknown partition " + p.str());
    }
    if (!consumers_.count(k)) add_consumer(k);
    consumers_.at(k).assigned.insert(p);
  }
  refresh_paused();
  check_exclusion();
}

void World::deliver(ConsumerIndex k, ControlMessage msg) {
  auto it = consumers_.find(k);
  if (it == consumers_.end()) return;  // lost, like a write to a dead queue
  it->second.inbox.push_back(std::move(msg));
}

std::vector<Ack> World::take_acks() {
  std::vector<Ack> out;
  out.swap(acks_);
  return out;
}

std::optional<Measurement> World::tick(double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidSpec, "dt must be positive");
  if (!started_) {
    started_ = true;
    monitor_.observe(now_, sizes());
  }
  ++tick_;
  now_ += dt;
  for (auto& [id, p] : partitions_) p.total_bytes += p.true_speed * dt;
  for (auto& [k, c] : consumers_) {
    if (!c.reachable || c.decommissioned) continue;
    drain(c, dt);
    ++c.cycle_ticks;
    if (c.gathered >= c.config.batch_bytes ||
        c.cycle_ticks >= c.config.wait_time_ticks) {
      process_inbox(c);
      c.gathered = 0.0;
      c.cycle_ticks = 0;
    }
  }
  refresh_paused();
  auto published = monitor_.observe(now_, sizes());
  check_exclusion();
  return published;
}

void World::drain(ConsumerState& c, double dt) {
  double budget = c.config.capacity * dt;
  std::vector<PartitionState*> active;
  for (const auto& p : c.assigned) {
    auto it = partitions_.find(p);
    if (it != partitions_.end() && it->second.lag() > 0.0) {
      active.push_back(&it->second);
    }
  }
  // Equal shares in ascending id order; partitions that need less than their
  // share are emptied and the remainder is split among the others.
  while (budget > 0.0 && !active.empty()) {
    const double share = budget / static_cast<double>(active.size());
    std::vector<PartitionState*> still;
    double spent = 0.0;
    for (PartitionState* p : active) {
      const double lag = p->lag();
      if (lag <= share) {
        p->consumed_bytes = p->total_bytes;
        spent += lag;
      } else {
        p->consumed_bytes += share;
        spent += share;
        still.push_back(p);
      }
    }
    c.gathered += spent;
    budget -= spent;
    if (still.size() == active.size()) break;  // every share was used in full
    active.swap(still);
  }
}

void World::process_inbox(ConsumerState& c) {
  while (!c.inbox.empty()) {
    ControlMessage msg = std::move(c.inbox.front());
    c.inbox.pop_front();
    switch (msg.kind) {
      case ControlKind::kStopConsuming:
        for (const auto& p : msg.partitions) c.assigned.erase(p);
        break;
      case ControlKind::kStartConsuming:
        for (const auto& p : msg.partitions) c.assigned.insert(p);
        break;
      case ControlKind::kDecommission:
        c.assigned.clear();
        c.decommissioned = true;
        break;
    }
    acks_.push_back({msg.ack_token, c.index, msg.kind, tick_});
  }
}

void World::refresh_paused() {
  for (auto& [id, p] : partitions_) p.paused = true;
  for (const auto& [k, c] : consumers_) {
    for (const auto& id : c.assigned) {
      auto it = partitions_.find(id);
      if (it != partitions_.end()) it->second.paused = false;
    }
  }
}

void World::check_exclusion() {
  std::map<PartitionId, ConsumerIndex> seen;
  for (const auto& [k, c] : consumers_) {
    for (const auto& p : c.assigned) {
      auto [it, inserted] = seen.emplace(p, k);
      if (!inserted) {
        std::ostringstream os;
        os << "partition " << p.str() << " owned by consumers " << it->second
           << " and " << k;
        violations_.push_back({tick_, os.str()});
      }
    }
  }
  for (const auto& [id, p] : partitions_) {
    if (p.consumed_bytes > p.total_bytes) {
      violations_.push_back({tick_, "partition " + id.str() + " over-consumed"});
    }
  }
}

std::map<PartitionId, double> World::sizes() const {
  std::map<PartitionId, double> out;
  for (const auto& [id, p] : partitions_) out.emplace(id, p.total_bytes);
  return out;
}

std::optional<ConsumerIndex> World::owner(const PartitionId& p) const {
  for (const auto& [k, c] : consumers_) {
    if (c.assigned.count(p)) return k;
  }
  return std::nullopt;
}

double World::total_lag() const {
  double sum = 0.0;
  for (const auto& [id, p] : partitions_) sum += p.lag();
  return sum;
}

double World::total_speed() const {
  double sum = 0.0;
  for (const auto& [id, p] : partitions_) sum += p.true_speed;
  return sum;
}

Assignment World::actual_assignment() const {
  Assignment a;
  for (const auto& [k, c] : consumers_) {
    for (const auto& p : c.assigned) {
      if (!a.owner(p)) a.assign(p, k);
    }
  }
  return a;
}

}  // namespace autoscale
