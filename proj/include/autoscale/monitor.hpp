#pragma once

#include <deque>
#include <map>
#include <optional>

#include "autoscale/model.hpp"

namespace autoscale {

struct MonitorSample {
  double t = 0.0;     // seconds
  double size = 0.0;  // bytes ever written to the partition
};

// Per-partition queue of size samples covering the last `horizon` seconds.
class MonitorWindow {
 public:
  explicit MonitorWindow(double horizon = 30.0);

  double horizon() const noexcept { return horizon_; }

  // Appends to the back of p's queue. Samples that do not advance time are
  // dropped so timestamps stay strictly increasing.
  void append(const PartitionId& p, double t, double size);

  // Drops samples older than now - horizon, from the front of each queue.
  void evict(double now);

  const std::deque<MonitorSample>& samples(const PartitionId& p) const;
  const std::map<PartitionId, std::deque<MonitorSample>>& all() const noexcept {
    return samples_;
  }

 private:
  double horizon_;
  std::map<PartitionId, std::deque<MonitorSample>> samples_;
};

// Average write speed across the window: (last.size - first.size) /
// (last.t - first.t), never negative; 0 with fewer than two samples.
double monitor_estimate(const MonitorWindow& w, const PartitionId& p);

MonitorWindow evict_stale(MonitorWindow w, double now);

struct MonitorConfig {
  double sampling_period = 5.0;
  double horizon = 30.0;
  double publish_period = 30.0;
};

// Samples partition sizes on a fixed period and publishes a Measurement of
// estimated speeds every publish period once the window spans the horizon.
class Monitor {
 public:
  explicit Monitor(MonitorConfig config = {});

  const MonitorConfig& config() const noexcept { return config_; }
  const MonitorWindow& window() const noexcept { return window_; }

  // Called with the clock and current sizes after every simulation step.
  // Returns a Measurement on publication instants.
  std::optional<Measurement> observe(double now,
                                     const std::map<PartitionId, double>& sizes);

  bool ready() const;

 private:
  MonitorConfig config_;
  MonitorWindow window_;
  double next_sample_ = 0.0;
  double next_publish_ = 0.0;
};

}  // namespace autoscale
