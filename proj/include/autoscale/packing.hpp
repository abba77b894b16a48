#pragma once

#include <cstddef>
#include <set>

#include "autoscale/algorithm.hpp"
#include "autoscale/model.hpp"

namespace autoscale {

// Classic heuristics (NF, FF, BF, WF and their Decreasing variants), adapted
// so that a newly opened bin reuses the partition's previous consumer index
// when that index has not been created yet, and otherwise the lowest index
// not yet created. Partitions of `prev` absent from `m` are ignored.
Assignment pack_classic(AlgorithmId algo, const Measurement& m,
                        const Assignment& prev, Capacity c);

// Modified Any-Fit (MWF, MBF, MWFP, MBFP). `prev` holds the current
// consumer group; `unassigned` the partitions no consumer owns. Together
// they must cover m exactly and be disjoint.
Assignment pack_modified(AlgorithmId algo, const Measurement& m,
                         const Assignment& prev,
                         const std::set<PartitionId>& unassigned, Capacity c);

// Dispatches on the family. For modified algorithms the unassigned set is
// derived as the partitions of m that prev does not place, and entries of
// prev that m no longer contains are dropped.
Assignment pack(AlgorithmId algo, const Measurement& m, const Assignment& prev,
                Capacity c);

// ceil(sum of speeds / c); 0 for an empty measurement.
std::size_t lower_bound(const Measurement& m, Capacity c);

inline constexpr std::size_t kExactPackLimit = 12;

// Optimal bin count via branch-and-bound over set partitions. Throws
// kTooLarge for more than kExactPackLimit items.
std::size_t exact_pack(const Measurement& m, Capacity c);

}  // namespace autoscale
