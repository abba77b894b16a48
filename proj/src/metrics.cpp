#include "autoscale/metrics.hpp"

#include <algorithm>
#include <limits>

#include "autoscale/error.hpp"

namespace autoscale {

std::set<PartitionId> rebalanced_set(const Assignment& prev,
                                     const Assignment& next) {
  std::set<PartitionId> out;
  for (const auto& [p, k] : next.placement()) {
    auto before = prev.owner(p);
    if (before && *before != k) out.insert(p);
  }
  return out;
}

double rscore(const std::set<PartitionId>& rebalanced, const Measurement& m,
              Capacity c) {
  double sum = 0.0;
  for (const auto& p : rebalanced) sum += m.speed(p);
  return sum / c.value();
}

std::map<AlgorithmId, double> cbs(
    const std::map<AlgorithmId, std::vector<std::size_t>>& bin_counts) {
  if (bin_counts.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cbs needs at least one algorithm");
  }
  const std::size_t n = bin_counts.begin()->second.size();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "cbs needs N >= 1");
  for (const auto& [a, counts] : bin_counts) {
    if (counts.size() != n) {
      throw Error(ErrorCode::kLengthMismatch,
                  "bin count series of " + std::string(to_string(a)) +
                      " has a different length");
    }
  }
  std::vector<std::size_t> best(n, std::numeric_limits<std::size_t>::max());
  for (const auto& [a, counts] : bin_counts) {
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], counts[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] == 0) {
      throw Error(ErrorCode::kInconsistentInput,
                  "bin counts must be >= 1 (iteration " + std::to_string(i) +
                      ")");
    }
  }
  std::map<AlgorithmId, double> out;
  for (const auto& [a, counts] : bin_counts) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += static_cast<double>(counts[i] - best[i]) /
             static_cast<double>(best[i]);
    }
    out[a] = sum / static_cast<double>(n);
  }
  return out;
}

double avg_rscore(const std::vector<double>& rscores) {
  if (rscores.empty()) {
    throw Error(ErrorCode::kEmptyInput, "avg_rscore needs N >= 1");
  }
  double sum = 0.0;
  for (double r : rscores) sum += r;
  return sum / static_cast<double>(rscores.size());
}

bool dominates(const CostPoint& q, const CostPoint& p) {
  return q.cbs <= p.cbs && q.avg_rscore <= p.avg_rscore &&
         (q.cbs < p.cbs || q.avg_rscore < p.avg_rscore);
}

std::vector<CostPoint> pareto_front(const std::vector<CostPoint>& points) {
  if (points.empty()) {
    throw Error(ErrorCode::kEmptyInput, "pareto_front needs points");
  }
  std::vector<CostPoint> front;
  for (const auto& p : points) {
    const bool dominated = std::any_of(
        points.begin(), points.end(),
        [&](const CostPoint& q) { return dominates(q, p); });
    if (!dominated) front.push_back(p);
  }
  std::stable_sort(front.begin(), front.end(),
                   [](const CostPoint& a, const CostPoint& b) {
                     if (a.cbs != b.cbs) return a.cbs < b.cbs;
                     return a.avg_rscore < b.avg_rscore;
                   });
  return front;
}

}  // namespace autoscale
