#include "autoscale/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "autoscale/error.hpp"

namespace autoscale {
namespace {
constexpr double kClockSlack = 1e-9;
const std::deque<MonitorSample> kNoSamples;
}  // namespace

MonitorWindow::MonitorWindow(double horizon) : horizon_(horizon) {
  if (!(horizon > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "monitor horizon must be positive");
  }
}

void MonitorWindow::append(const PartitionId& p, double t, double size) {
  auto& q = samples_[p];
  if (!q.empty() && !(t > q.back().t)) return;
  q.push_back({t, size});
}

void MonitorWindow::evict(double now) {
  const double oldest = now - horizon_;
  for (auto& [p, q] : samples_) {
    while (!q.empty() && q.front().t < oldest - kClockSlack) q.pop_front();
  }
}

const std::deque<MonitorSample>& MonitorWindow::samples(
    const PartitionId& p) const {
  auto it = samples_.find(p);
  return it == samples_.end() ? kNoSamples : it->second;
}

double monitor_estimate(const MonitorWindow& w, const PartitionId& p) {
  const auto& q = w.samples(p);
  if (q.size() < 2) return 0.0;
  const double rate = (q.back().size - q.front().size) / (q.back().t - q.front().t);
  return std::max(0.0, rate);
}

MonitorWindow evict_stale(MonitorWindow w, double now) {
  w.evict(now);
  return w;
}

Monitor::Monitor(MonitorConfig config)
    : config_(config),
      window_(config.horizon),
      next_publish_(config.horizon) {
  if (!(config.sampling_period > 0.0) || !(config.publish_period > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "monitor periods must be positive");
  }
}

bool Monitor::ready() const {
  if (window_.all().empty()) return false;
  for (const auto& [p, q] : window_.all()) {
    if (q.size() < 2 || q.back().t - q.front().t < config_.horizon - kClockSlack) {
      return false;
    }
  }
  return true;
}

std::optional<Measurement> Monitor::observe(
    double now, const std::map<PartitionId, double>& sizes) {
  if (now + kClockSlack >= next_sample_) {
    for (const auto& [p, size] : sizes) window_.append(p, now, size);
    while (next_sample_ <= now + kClockSlack) next_sample_ += config_.sampling_period;
  }
  window_.evict(now);
  if (now + kClockSlack < next_publish_) return std::nullopt;
  while (next_publish_ <= now + kClockSlack) next_publish_ += config_.publish_period;
  if (!ready()) return std::nullopt;
  std::map<PartitionId, double> speeds;
  for (const auto& [p, size] : sizes) speeds.emplace(p, monitor_estimate(window_, p));
  return Measurement(std::move(speeds), static_cast<std::int64_t>(std::llround(now)));
}

}  // namespace autoscale
