#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace autoscale {

// Classic Any-Fit heuristics followed by the rebalance-aware variants.
enum class AlgorithmId {
  kNF,
  kNFD,
  kFF,
  kFFD,
  kBF,
  kBFD,
  kWF,
  kWFD,
  kMWF,
  kMBF,
  kMWFP,
  kMBFP,
};

inline constexpr std::array<AlgorithmId, 12> kAllAlgorithms = {
    AlgorithmId::kNF,  AlgorithmId::kNFD,  AlgorithmId::kFF,
    AlgorithmId::kFFD, AlgorithmId::kBF,   AlgorithmId::kBFD,
    AlgorithmId::kWF,  AlgorithmId::kWFD,  AlgorithmId::kMWF,
    AlgorithmId::kMBF, AlgorithmId::kMWFP, AlgorithmId::kMBFP,
};

std::string_view to_string(AlgorithmId a);
std::optional<AlgorithmId> parse_algorithm(std::string_view name);
// Parses a comma separated list; throws kParseError on unknown names.
std::vector<AlgorithmId> parse_algorithm_list(std::string_view csv);

constexpr bool is_modified(AlgorithmId a) {
  return a == AlgorithmId::kMWF || a == AlgorithmId::kMBF ||
         a == AlgorithmId::kMWFP || a == AlgorithmId::kMBFP;
}

constexpr bool is_decreasing(AlgorithmId a) {
  return a == AlgorithmId::kNFD || a == AlgorithmId::kFFD ||
         a == AlgorithmId::kBFD || a == AlgorithmId::kWFD;
}

}  // namespace autoscale
