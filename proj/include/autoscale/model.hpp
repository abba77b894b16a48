#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace autoscale {

using ConsumerIndex = std::uint32_t;

// Identifier of a topic partition, rendered "topic:index". Ordering is
// natural: by topic, then by numeric index, so "t:2" sorts before "t:10".
// Identifiers without a numeric suffix sort after numbered ones of the same
// prefix, by their full text.
class PartitionId {
 public:
  PartitionId() = default;
  explicit PartitionId(std::string text);
  PartitionId(std::string_view topic, std::uint32_t index);

  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const PartitionId& a, const PartitionId& b) {
    return a.text_ == b.text_;
  }
  friend std::strong_ordering operator<=>(const PartitionId& a,
                                          const PartitionId& b);

 private:
  std::string text_;
  std::size_t topic_len_ = 0;
  std::optional<std::uint64_t> index_;
};

// Maximum consumption rate of one consumer, in bytes/s.
class Capacity {
 public:
  explicit Capacity(double bytes_per_sec);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

// Item-fit predicate shared by every heuristic, the exact oracle and the
// assignment validator. A relative slack of 1e-9 absorbs summation round-off.
bool fits(double load, double size, Capacity c);

// Write speed of each partition at one instant.
class Measurement {
 public:
  Measurement() = default;
  Measurement(std::initializer_list<std::pair<std::string, double>> speeds);
  explicit Measurement(std::map<PartitionId, double> speeds,
                       std::int64_t taken_at = 0);

  const std::map<PartitionId, double>& speeds() const noexcept {
    return speeds_;
  }
  std::int64_t taken_at() const noexcept { return taken_at_; }

  std::size_t size() const noexcept { return speeds_.size(); }
  bool empty() const noexcept { return speeds_.empty(); }
  bool contains(const PartitionId& p) const { return speeds_.count(p) != 0; }
  // Throws kUnknownPartition when p is absent.
  double speed(const PartitionId& p) const;
  double total() const;
  std::set<PartitionId> partitions() const;

  void set(const PartitionId& p, double speed);

 private:
  std::map<PartitionId, double> speeds_;
  std::int64_t taken_at_ = 0;
};

// Partition-to-consumer placement. Loads are derived from a Measurement.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::initializer_list<std::pair<std::string, ConsumerIndex>> placement);
  explicit Assignment(std::map<PartitionId, ConsumerIndex> placement)
      : placement_(std::move(placement)) {}

  const std::map<PartitionId, ConsumerIndex>& placement() const noexcept {
    return placement_;
  }
  std::size_t size() const noexcept { return placement_.size(); }
  bool empty() const noexcept { return placement_.empty(); }
  std::optional<ConsumerIndex> owner(const PartitionId& p) const;

  void assign(const PartitionId& p, ConsumerIndex consumer) {
    placement_[p] = consumer;
  }
  void erase(const PartitionId& p) { placement_.erase(p); }

  // Number of distinct consumer indices in use.
  std::size_t bin_count() const;
  std::set<ConsumerIndex> consumers() const;
  std::map<ConsumerIndex, std::vector<PartitionId>> bins() const;
  // Sum of assigned speeds per consumer; partitions missing from m count 0.
  std::map<ConsumerIndex, double> loads(const Measurement& m) const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::map<PartitionId, ConsumerIndex> placement_;
};

// Returns a description of the first violated invariant, or nullopt when
// every partition of m is placed exactly once and no load exceeds c.
std::optional<std::string> check_assignment(const Assignment& a,
                                            const Measurement& m, Capacity c);

}  // namespace autoscale
