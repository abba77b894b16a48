#pragma once

#include <map>
#include <set>
#include <vector>

#include "autoscale/algorithm.hpp"
#include "autoscale/model.hpp"

namespace autoscale {

// One algorithm's outcome at one iteration of a stream.
struct IterationRecord {
  std::size_t iteration = 0;
  AlgorithmId algorithm = AlgorithmId::kNF;
  std::size_t bins = 0;
  double rscore = 0.0;
};

// An algorithm's position in the (operational cost, rebalance cost) plane.
struct CostPoint {
  AlgorithmId algorithm = AlgorithmId::kNF;
  double cbs = 0.0;
  double avg_rscore = 0.0;
};

// Partitions placed by both assignments whose consumer differs. Partitions
// that appear or disappear between the two are not counted.
std::set<PartitionId> rebalanced_set(const Assignment& prev,
                                     const Assignment& next);

// Rate at which data accumulates on the rebalanced partitions, in units of
// consumer capacity: (1/c) * sum of their current speeds.
double rscore(const std::set<PartitionId>& rebalanced, const Measurement& m,
              Capacity c);

// Cardinal Bin Score: mean over iterations of the relative excess of each
// algorithm's bin count over the per-iteration minimum across the given set.
std::map<AlgorithmId, double> cbs(
    const std::map<AlgorithmId, std::vector<std::size_t>>& bin_counts);

double avg_rscore(const std::vector<double>& rscores);

// Points not dominated by any other, sorted by ascending cbs. Points with
// identical coordinates are all kept.
std::vector<CostPoint> pareto_front(const std::vector<CostPoint>& points);

bool dominates(const CostPoint& q, const CostPoint& p);

}  // namespace autoscale
