#include "autoscale/packing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "autoscale/error.hpp"

namespace autoscale {
namespace {

enum class Fit { kNext, kFirst, kBest, kWorst };

Fit fit_of(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::kNF:
    case AlgorithmId::kNFD:
      return Fit::kNext;
    case AlgorithmId::kFF:
    case AlgorithmId::kFFD:
      return Fit::kFirst;
    case AlgorithmId::kBF:
    case AlgorithmId::kBFD:
    case AlgorithmId::kMBF:
    case AlgorithmId::kMBFP:
      return Fit::kBest;
    case AlgorithmId::kWF:
    case AlgorithmId::kWFD:
    case AlgorithmId::kMWF:
    case AlgorithmId::kMWFP:
      return Fit::kWorst;
  }
  return Fit::kFirst;
}

struct Item {
  const PartitionId* id;
  double size;
  std::optional<ConsumerIndex> owner;
};

// Largest first; equal speeds fall back to ascending partition id.
bool larger_first(const Item& a, const Item& b) {
  if (a.size != b.size) return a.size > b.size;
  return *a.id < *b.id;
}

// The bins of the configuration being built. Every created bin stays open;
// next-fit only ever looks at the most recently created one.
class BinSet {
 public:
  explicit BinSet(Capacity c) : capacity_(c) {}

  bool created(ConsumerIndex k) const { return loads_.count(k) != 0; }

  void create(ConsumerIndex k) {
    loads_.emplace(k, 0.0);
    last_created_ = k;
  }

  ConsumerIndex lowest_free() const {
    ConsumerIndex k = 0;
    for (const auto& [index, load] : loads_) {
      if (index != k) break;
      ++k;
    }
    return k;
  }

  // Bin for a new item: the previous owner when it does not exist yet,
  // otherwise the lowest index not created.
  ConsumerIndex creation_index(const Item& item) const {
    if (item.owner && !created(*item.owner)) return *item.owner;
    return lowest_free();
  }

  bool fits_in(ConsumerIndex k, double size) const {
    return fits(loads_.at(k), size, capacity_);
  }

  std::optional<ConsumerIndex> choose(Fit fit, double size) const {
    if (fit == Fit::kNext) {
      if (last_created_ && fits_in(*last_created_, size)) return last_created_;
      return std::nullopt;
    }
    std::optional<ConsumerIndex> chosen;
    double chosen_load = 0.0;
    for (const auto& [k, load] : loads_) {
      if (!fits(load, size, capacity_)) continue;
      if (fit == Fit::kFirst) return k;
      if (!chosen || (fit == Fit::kBest && load > chosen_load) ||
          (fit == Fit::kWorst && load < chosen_load)) {
        chosen = k;
        chosen_load = load;
      }
    }
    return chosen;
  }

  void place(ConsumerIndex k, const Item& item) {
    loads_.at(k) += item.size;
    result_.assign(*item.id, k);
  }

  // Places by the fit rule, creating a bin when nothing fits.
  void place_or_create(Fit fit, const Item& item) {
    auto k = choose(fit, item.size);
    if (!k) {
      k = creation_index(item);
      create(*k);
    }
    place(*k, item);
  }

  Assignment take() && { return std::move(result_); }

 private:
  Capacity capacity_;
  std::map<ConsumerIndex, double> loads_;
  std::optional<ConsumerIndex> last_created_;
  Assignment result_;
};

void reject_oversize(const Measurement& m, Capacity c) {
  for (const auto& [p, s] : m.speeds()) {
    if (s > c.value()) {
      std::ostringstream os;
      os << "partition " << p.str() << " speed " << s << " exceeds capacity "
         << c.value();
      throw Error(ErrorCode::kOversizeItem, os.str());
    }
  }
}

}  // namespace

Assignment pack_classic(AlgorithmId algo, const Measurement& m,
                        const Assignment& prev, Capacity c) {
  if (is_modified(algo)) {
    throw Error(ErrorCode::kInconsistentInput,
                std::string(to_string(algo)) + " is not a classic heuristic");
  }
  reject_oversize(m, c);
  std::vector<Item> items;
  items.reserve(m.size());
  for (const auto& [p, s] : m.speeds()) items.push_back({&p, s, prev.owner(p)});
  if (is_decreasing(algo)) {
    std::stable_sort(items.begin(), items.end(), larger_first);
  }
  const Fit fit = fit_of(algo);
  BinSet bins(c);
  for (const Item& item : items) bins.place_or_create(fit, item);
  return std::move(bins).take();
}

Assignment pack_modified(AlgorithmId algo, const Measurement& m,
                         const Assignment& prev,
                         const std::set<PartitionId>& unassigned, Capacity c) {
  if (!is_modified(algo)) {
    throw Error(ErrorCode::kInconsistentInput,
                std::string(to_string(algo)) + " is not a modified heuristic");
  }
  reject_oversize(m, c);
  for (const auto& [p, k] : prev.placement()) {
    if (!m.contains(p)) {
      throw Error(ErrorCode::kInconsistentInput,
                  "assigned partition " + p.str() + " is not measured");
    }
    if (unassigned.count(p)) {
      throw Error(ErrorCode::kInconsistentInput,
                  "partition " + p.str() + " is both assigned and unassigned");
    }
  }
  for (const auto& p : unassigned) {
    if (!m.contains(p)) {
      throw Error(ErrorCode::kInconsistentInput,
                  "unassigned partition " + p.str() + " is not measured");
    }
  }
  if (prev.size() + unassigned.size() != m.size()) {
    throw Error(ErrorCode::kInconsistentInput,
                "measured partitions are neither assigned nor unassigned");
  }

  const bool by_max_partition =
      algo == AlgorithmId::kMWFP || algo == AlgorithmId::kMBFP;
  struct Group {
    ConsumerIndex consumer;
    double key = 0.0;
    std::vector<Item> partitions;
  };
  std::vector<Group> groups;
  for (auto& [consumer, ids] : prev.bins()) {
    Group g{consumer, 0.0, {}};
    for (const auto& id : ids) {
      const auto& stored = m.speeds().find(id)->first;
      const double s = m.speed(id);
      g.partitions.push_back({&stored, s, consumer});
      g.key = by_max_partition ? std::max(g.key, s) : g.key + s;
    }
    groups.push_back(std::move(g));
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const Group& a, const Group& b) { return a.key > b.key; });

  const Fit fit = fit_of(algo);
  BinSet bins(c);
  std::vector<Item> pending;
  for (const auto& id : unassigned) {
    pending.push_back({&m.speeds().find(id)->first, m.speed(id), std::nullopt});
  }

  for (Group& g : groups) {
    auto& pset = g.partitions;
    std::stable_sort(pset.begin(), pset.end(), larger_first);
    // Smallest first into bins that already exist.
    while (!pset.empty()) {
      auto k = bins.choose(fit, pset.back().size);
      if (!k) break;
      bins.place(*k, pset.back());
      pset.pop_back();
    }
    if (pset.empty()) continue;
    // The rest go back to their own consumer, largest first, until one
    // does not fit; it and everything after it become unassigned.
    bins.create(g.consumer);
    std::size_t i = 0;
    for (; i < pset.size(); ++i) {
      if (!bins.fits_in(g.consumer, pset[i].size)) break;
      bins.place(g.consumer, pset[i]);
    }
    pending.insert(pending.end(), pset.begin() + static_cast<std::ptrdiff_t>(i),
                   pset.end());
  }

  std::stable_sort(pending.begin(), pending.end(), larger_first);
  for (const Item& item : pending) bins.place_or_create(fit, item);
  return std::move(bins).take();
}

Assignment pack(AlgorithmId algo, const Measurement& m, const Assignment& prev,
                Capacity c) {
  if (!is_modified(algo)) return pack_classic(algo, m, prev, c);
  Assignment current;
  std::set<PartitionId> unassigned;
  for (const auto& [p, s] : m.speeds()) {
    if (auto k = prev.owner(p)) {
      current.assign(p, *k);
    } else {
      unassigned.insert(p);
    }
  }
  return pack_modified(algo, m, current, unassigned, c);
}

std::size_t lower_bound(const Measurement& m, Capacity c) {
  if (m.empty()) return 0;
  const double ratio = m.total() / c.value();
  return static_cast<std::size_t>(std::max(0.0, std::ceil(ratio - 1e-9)));
}

namespace {

class ExactSearch {
 public:
  ExactSearch(std::vector<double> sizes, Capacity c)
      : sizes_(std::move(sizes)), capacity_(c) {
    std::sort(sizes_.begin(), sizes_.end(), std::greater<>());
    suffix_.assign(sizes_.size() + 1, 0.0);
    for (std::size_t i = sizes_.size(); i-- > 0;) {
      suffix_[i] = suffix_[i + 1] + sizes_[i];
    }
    best_ = sizes_.size();
  }

  std::size_t solve() {
    if (sizes_.empty()) return 0;
    search(0);
    return best_;
  }

 private:
  void search(std::size_t i) {
    if (loads_.size() >= best_) return;
    if (i == sizes_.size()) {
      best_ = loads_.size();
      return;
    }
    double slack = 0.0;
    for (double l : loads_) slack += capacity_.value() - l;
    const double overflow = suffix_[i] - slack;
    if (overflow > 0.0) {
      const auto extra = static_cast<std::size_t>(
          std::ceil(overflow / capacity_.value() - 1e-9));
      if (loads_.size() + extra >= best_) return;
    }
    for (std::size_t b = 0; b < loads_.size(); ++b) {
      if (!fits(loads_[b], sizes_[i], capacity_)) continue;
      bool symmetric = false;
      for (std::size_t e = 0; e < b && !symmetric; ++e) {
        symmetric = loads_[e] == loads_[b];
      }
      if (symmetric) continue;
      loads_[b] += sizes_[i];
      search(i + 1);
      loads_[b] -= sizes_[i];
    }
    loads_.push_back(sizes_[i]);
    search(i + 1);
    loads_.pop_back();
  }

  std::vector<double> sizes_;
  std::vector<double> suffix_;
  std::vector<double> loads_;
  Capacity capacity_;
  std::size_t best_;
};

}  // namespace

std::size_t exact_pack(const Measurement& m, Capacity c) {
  if (m.size() > kExactPackLimit) {
    throw Error(ErrorCode::kTooLarge, "exact_pack supports at most " +
                                          std::to_string(kExactPackLimit) +
                                          " items, got " +
                                          std::to_string(m.size()));
  }
  reject_oversize(m, c);
  std::vector<double> sizes;
  for (const auto& [p, s] : m.speeds()) sizes.push_back(s);
  return ExactSearch(std::move(sizes), c).solve();
}

}  // namespace autoscale
