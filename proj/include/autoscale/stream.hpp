#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "autoscale/model.hpp"

namespace autoscale {

enum class InitStrategy { kUniformRandom, kAllZero, kHalfCapacity, kFullCapacity };

std::string_view to_string(InitStrategy s);
// Accepts the CLI spellings (uniform, zero, half, full) and the long names.
InitStrategy parse_init_strategy(std::string_view name);

struct StreamSpec {
  std::size_t partitions = 100;
  std::size_t length = 500;
  double delta = 0.0;  // percent of capacity per iteration
  double capacity = 2.3e6;
  InitStrategy init = InitStrategy::kUniformRandom;
  std::uint64_t seed = 1;
};

// Validation for every field; throws kInvalidSpec.
void validate(const StreamSpec& spec);

struct Stream {
  StreamSpec spec;
  std::vector<PartitionId> partition_ids;
  std::vector<Measurement> measurements;
};

// Name of the generator recorded in stream files.
inline constexpr std::string_view kStreamRng = "mt19937_64";

// Partition ids used by generated streams: "load:0", "load:1", ...
std::vector<PartitionId> stream_partition_ids(std::size_t count);

// Bounded random walk: s_0 per the init strategy, then
// s_i = clamp(s_{i-1} + phi * C / 100, 0, C) with phi uniform on
// [-delta, delta], one draw per partition per iteration in id order.
Stream generate(const StreamSpec& spec);

// Uniform double on [0, 1) from the top 53 bits of one generator output, so
// generated values only depend on the engine, not on the standard library.
double unit_uniform(std::uint64_t bits);

std::string serialize(const Stream& stream);
Stream parse_stream(const std::string& text);

void write_stream(const Stream& stream, const std::filesystem::path& path);
Stream read_stream(const std::filesystem::path& path);

// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string content_digest(std::string_view bytes);

}  // namespace autoscale
