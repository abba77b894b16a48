#include "autoscale/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "autoscale/error.hpp"

namespace autoscale {

PartitionId::PartitionId(std::string text) : text_(std::move(text)) {
  if (text_.empty()) {
    throw Error(ErrorCode::kInconsistentInput, "empty partition id");
  }
  topic_len_ = text_.size();
  const auto colon = text_.rfind(':');
  if (colon == std::string::npos || colon + 1 == text_.size()) return;
  std::uint64_t index = 0;
  const char* first = text_.data() + colon + 1;
  const char* last = text_.data() + text_.size();
  auto [ptr, ec] = std::from_chars(first, last, index);
  if (ec == std::errc() && ptr == last) {
    topic_len_ = colon;
    index_ = index;
  }
}

PartitionId::PartitionId(std::string_view topic, std::uint32_t index)
    : PartitionId(std::string(topic) + ":" + std::to_string(index)) {}

std::strong_ordering operator<=>(const PartitionId& a, const PartitionId& b) {
  const std::string_view ta(a.text_.data(), a.topic_len_);
  const std::string_view tb(b.text_.data(), b.topic_len_);
  if (auto cmp = ta.compare(tb); cmp != 0) {
    return cmp < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (a.index_ && b.index_) {
    if (auto cmp = *a.index_ <=> *b.index_; cmp != 0) return cmp;
  } else if (a.index_.has_value() != b.index_.has_value()) {
    return a.index_ ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (auto cmp = a.text_.compare(b.text_); cmp != 0) {
    return cmp < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

Capacity::Capacity(double bytes_per_sec) : value_(bytes_per_sec) {
  if (!(bytes_per_sec > 0.0) || !std::isfinite(bytes_per_sec)) {
    throw Error(ErrorCode::kInvalidSpec, "capacity must be positive and finite");
  }
}

bool fits(double load, double size, Capacity c) {
  return load + size <= c.value() * (1.0 + 1e-9);
}

Measurement::Measurement(
    std::initializer_list<std::pair<std::string, double>> speeds) {
  for (const auto& [id, s] : speeds) set(PartitionId(id), s);
}

Measurement::Measurement(std::map<PartitionId, double> speeds,
                         std::int64_t taken_at)
    : taken_at_(taken_at) {
  for (const auto& [id, s] : speeds) set(id, s);
}

double Measurement::speed(const PartitionId& p) const {
  auto it = speeds_.find(p);
  if (it == speeds_.end()) {
    throw Error(ErrorCode::kUnknownPartition, "unknown partition " + p.str());
  }
  return it->second;
}

double Measurement::total() const {
  double sum = 0.0;
  for (const auto& [id, s] : speeds_) sum += s;
  return sum;
}

std::set<PartitionId> Measurement::partitions() const {
  std::set<PartitionId> out;
  for (const auto& [id, s] : speeds_) out.insert(out.end(), id);
  return out;
}

void Measurement::set(const PartitionId& p, double speed) {
  if (!(speed >= 0.0) || !std::isfinite(speed)) {
    throw Error(ErrorCode::kInconsistentInput,
                "speed of " + p.str() + " must be finite and >= 0");
  }
  speeds_[p] = speed;
}

Assignment::Assignment(
    std::initializer_list<std::pair<std::string, ConsumerIndex>> placement) {
  for (const auto& [id, c] : placement) placement_[PartitionId(id)] = c;
}

std::optional<ConsumerIndex> Assignment::owner(const PartitionId& p) const {
  auto it = placement_.find(p);
  if (it == placement_.end()) return std::nullopt;
  return it->second;
}

std::size_t Assignment::bin_count() const { return consumers().size(); }

std::set<ConsumerIndex> Assignment::consumers() const {
  std::set<ConsumerIndex> out;
  for (const auto& [p, c] : placement_) out.insert(c);
  return out;
}

std::map<ConsumerIndex, std::vector<PartitionId>> Assignment::bins() const {
  std::map<ConsumerIndex, std::vector<PartitionId>> out;
  for (const auto& [p, c] : placement_) out[c].push_back(p);
  return out;
}

std::map<ConsumerIndex, double> Assignment::loads(const Measurement& m) const {
  std::map<ConsumerIndex, double> out;
  for (const auto& [p, c] : placement_) {
    auto it = m.speeds().find(p);
    out[c] += it == m.speeds().end() ? 0.0 : it->second;
  }
  return out;
}

std::optional<std::string> check_assignment(const Assignment& a,
                                            const Measurement& m, Capacity c) {
  for (const auto& [p, s] : m.speeds()) {
    if (!a.owner(p)) return "partition " + p.str() + " is not placed";
  }
  for (const auto& [p, k] : a.placement()) {
    if (!m.contains(p)) return "partition " + p.str() + " is not measured";
  }
  // Re-accumulate per bin in partition order so the check does not depend on
  // the order the heuristic added items in beyond the shared fit slack.
  std::map<ConsumerIndex, double> loads;
  for (const auto& [p, k] : a.placement()) {
    const double s = m.speed(p);
    if (!fits(loads[k], s, c)) {
      std::ostringstream os;
      os << "consumer " << k << " exceeds capacity " << c.value();
      return os.str();
    }
    loads[k] += s;
  }
  return std::nullopt;
}

}  // namespace autoscale
