#include "autoscale/stream.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "autoscale/error.hpp"

namespace autoscale {

using nlohmann::json;

std::string_view to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::kUniformRandom: return "uniform";
    case InitStrategy::kAllZero: return "zero";
    case InitStrategy::kHalfCapacity: return "half";
    case InitStrategy::kFullCapacity: return "full";
  }
  return "?";
}

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "uniform" || name == "uniform-random") {
    return InitStrategy::kUniformRandom;
  }
  if (name == "zero" || name == "all-zero") return InitStrategy::kAllZero;
  if (name == "half" || name == "half-capacity") return InitStrategy::kHalfCapacity;
  if (name == "full" || name == "full-capacity") return InitStrategy::kFullCapacity;
  throw Error(ErrorCode::kInvalidSpec,
              "unknown init strategy '" + std::string(name) + "'");
}

void validate(const StreamSpec& spec) {
  if (spec.partitions == 0) {
    throw Error(ErrorCode::kInvalidSpec, "partitions must be >= 1");
  }
  if (spec.length == 0) throw Error(ErrorCode::kInvalidSpec, "length must be >= 1");
  if (!(spec.delta >= 0.0 && spec.delta <= 100.0)) {
    throw Error(ErrorCode::kInvalidSpec, "delta must lie in [0, 100]");
  }
  if (!(spec.capacity > 0.0) || !std::isfinite(spec.capacity)) {
    throw Error(ErrorCode::kInvalidSpec, "capacity must be positive");
  }
}

std::vector<PartitionId> stream_partition_ids(std::size_t count) {
  std::vector<PartitionId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ids.emplace_back("load", static_cast<std::uint32_t>(i));
  }
  return ids;
}

double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Stream generate(const StreamSpec& spec) {
  validate(spec);
  Stream out{spec, stream_partition_ids(spec.partitions), {}};
  const double c = spec.capacity;
  std::mt19937_64 rng(spec.seed);

  std::vector<double> speeds(spec.partitions, 0.0);
  for (double& s : speeds) {
    switch (spec.init) {
      case InitStrategy::kUniformRandom: s = unit_uniform(rng()) * c; break;
      case InitStrategy::kAllZero: s = 0.0; break;
      case InitStrategy::kHalfCapacity: s = 0.5 * c; break;
      case InitStrategy::kFullCapacity: s = c; break;
    }
  }

  auto snapshot = [&](std::size_t i) {
    std::map<PartitionId, double> m;
    for (std::size_t p = 0; p < speeds.size(); ++p) {
      m.emplace(out.partition_ids[p], speeds[p]);
    }
    return Measurement(std::move(m), static_cast<std::int64_t>(i));
  };

  out.measurements.reserve(spec.length);
  out.measurements.push_back(snapshot(0));
  for (std::size_t i = 1; i < spec.length; ++i) {
    for (double& s : speeds) {
      const double phi = -spec.delta + 2.0 * spec.delta * unit_uniform(rng());
      s = std::clamp(s + phi / 100.0 * c, 0.0, c);
    }
    out.measurements.push_back(snapshot(i));
  }
  return out;
}

std::string serialize(const Stream& stream) {
  json spec = {
      {"partitions", stream.spec.partitions},
      {"length", stream.spec.length},
      {"delta", stream.spec.delta},
      {"capacity", stream.spec.capacity},
      {"init", to_string(stream.spec.init)},
      {"seed", stream.spec.seed},
      {"rng", kStreamRng},
  };
  json ids = json::array();
  for (const auto& p : stream.partition_ids) ids.push_back(p.str());
  json rows = json::array();
  for (const auto& m : stream.measurements) {
    json row = json::array();
    for (const auto& p : stream.partition_ids) row.push_back(m.speed(p));
    rows.push_back(std::move(row));
  }
  json doc = {{"spec", std::move(spec)},
              {"partitions", std::move(ids)},
              {"measurements", std::move(rows)}};
  return doc.dump() + "\n";
}

Stream parse_stream(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const json& js = doc.at("spec");
    Stream out;
    out.spec.partitions = js.at("partitions").get<std::size_t>();
    out.spec.length = js.at("length").get<std::size_t>();
    out.spec.delta = js.at("delta").get<double>();
    out.spec.capacity = js.at("capacity").get<double>();
    out.spec.init = parse_init_strategy(js.at("init").get<std::string>());
    out.spec.seed = js.at("seed").get<std::uint64_t>();
    validate(out.spec);
    for (const auto& id : doc.at("partitions")) {
      out.partition_ids.emplace_back(id.get<std::string>());
    }
    if (out.partition_ids.size() != out.spec.partitions) {
      throw Error(ErrorCode::kParseError, "partition header length mismatch");
    }
    std::int64_t i = 0;
    for (const auto& row : doc.at("measurements")) {
      if (row.size() != out.partition_ids.size()) {
        throw Error(ErrorCode::kParseError, "measurement row length mismatch");
      }
      std::map<PartitionId, double> m;
      for (std::size_t p = 0; p < row.size(); ++p) {
        m.emplace(out.partition_ids[p], row[p].get<double>());
      }
      if (m.size() != out.partition_ids.size()) {
        throw Error(ErrorCode::kParseError, "duplicate partition id");
      }
      out.measurements.emplace_back(std::move(m), i++);
    }
    if (out.measurements.size() != out.spec.length) {
      throw Error(ErrorCode::kParseError, "measurement count mismatch");
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("stream file: ") + e.what());
  }
}

void write_stream(const Stream& stream, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  os << serialize(stream);
  if (!os) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

Stream read_stream(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_stream(buf.str());
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace autoscale
