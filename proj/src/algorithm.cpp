#include "autoscale/algorithm.hpp"

#include <string>

#include "autoscale/error.hpp"

namespace autoscale {

std::string_view to_string(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::kNF: return "NF";
    case AlgorithmId::kNFD: return "NFD";
    case AlgorithmId::kFF: return "FF";
    case AlgorithmId::kFFD: return "FFD";
    case AlgorithmId::kBF: return "BF";
    case AlgorithmId::kBFD: return "BFD";
    case AlgorithmId::kWF: return "WF";
    case AlgorithmId::kWFD: return "WFD";
    case AlgorithmId::kMWF: return "MWF";
    case AlgorithmId::kMBF: return "MBF";
    case AlgorithmId::kMWFP: return "MWFP";
    case AlgorithmId::kMBFP: return "MBFP";
  }
  return "?";
}

std::optional<AlgorithmId> parse_algorithm(std::string_view name) {
  for (AlgorithmId a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<AlgorithmId> parse_algorithm_list(std::string_view csv) {
  std::vector<AlgorithmId> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto end = std::min(csv.find(',', start), csv.size());
    const auto token = csv.substr(start, end - start);
    auto a = parse_algorithm(token);
    if (!a) {
      throw Error(ErrorCode::kParseError,
                  "unknown algorithm '" + std::string(token) + "'");
    }
    bool seen = false;
    for (AlgorithmId b : out) seen = seen || b == *a;
    if (!seen) out.push_back(*a);
    start = end + 1;
  }
  return out;
}

}  // namespace autoscale
