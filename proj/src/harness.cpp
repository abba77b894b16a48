#include "autoscale/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "autoscale/error.hpp"
#include "autoscale/packing.hpp"

namespace autoscale {

void validate(const ExperimentPlan& plan) {
  if (plan.deltas.empty()) throw Error(ErrorCode::kInvalidSpec, "no deltas");
  if (plan.seeds.empty()) throw Error(ErrorCode::kInvalidSpec, "no seeds");
  if (plan.algorithms.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "no algorithms");
  }
  for (double d : plan.deltas) {
    StreamSpec spec = stream_spec_for(plan, d, 0);
    validate(spec);
  }
}

StreamSpec stream_spec_for(const ExperimentPlan& plan, double delta,
                           std::uint64_t seed) {
  StreamSpec spec;
  spec.partitions = plan.partitions;
  spec.length = plan.stream_length;
  spec.delta = delta;
  spec.capacity = plan.capacity;
  spec.init = plan.init;
  spec.seed = seed;
  return spec;
}

std::vector<IterationRecord> run_stream(const std::vector<AlgorithmId>& algorithms,
                                        const Stream& stream, Capacity c) {
  if (algorithms.empty()) {
    throw Error(ErrorCode::kEmptyInput, "run_stream needs algorithms");
  }
  std::vector<IterationRecord> out;
  out.reserve(algorithms.size() * stream.measurements.size());
  for (AlgorithmId a : algorithms) {
    Assignment prev;
    for (std::size_t i = 0; i < stream.measurements.size(); ++i) {
      const Measurement& m = stream.measurements[i];
      Assignment next = pack(a, m, prev, c);
      const double r = i == 0 ? 0.0 : rscore(rebalanced_set(prev, next), m, c);
      out.push_back({i, a, next.bin_count(), r});
      prev = std::move(next);
    }
  }
  return out;
}

ExperimentResult summarize(std::vector<ExperimentRecord> records,
                           const ExperimentPlan& plan) {
  validate(plan);
  const std::size_t n = plan.stream_length;
  using Key = std::tuple<double, std::uint64_t, AlgorithmId>;
  std::map<Key, std::vector<const IterationRecord*>> series;
  for (const auto& r : records) {
    series[{r.delta, r.seed, r.record.algorithm}].push_back(&r.record);
  }

  ExperimentResult result;
  for (double delta : plan.deltas) {
    std::map<AlgorithmId, double> cbs_sum, rscore_sum;
    for (std::uint64_t seed : plan.seeds) {
      std::map<AlgorithmId, std::vector<std::size_t>> counts;
      std::map<AlgorithmId, double> avg;
      for (AlgorithmId a : plan.algorithms) {
        auto it = series.find({delta, seed, a});
        std::vector<std::size_t> z(n, 0);
        std::vector<double> r(n, 0.0);
        std::vector<bool> seen(n, false);
        if (it != series.end() && it->second.size() == n) {
          for (const IterationRecord* rec : it->second) {
            if (rec->iteration >= n || seen[rec->iteration]) break;
            seen[rec->iteration] = true;
            z[rec->iteration] = rec->bins;
            r[rec->iteration] = rec->rscore;
          }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
          std::ostringstream os;
          os << "incomplete records for delta " << format_number(delta)
             << " seed " << seed << " algorithm " << to_string(a);
          throw Error(ErrorCode::kIncompleteRecords, os.str());
        }
        counts[a] = std::move(z);
        avg[a] = avg_rscore(r);
      }
      const auto scores = cbs(counts);
      SeedSummary s{delta, seed, {}, {}};
      for (AlgorithmId a : plan.algorithms) {
        s.points.push_back({a, scores.at(a), avg.at(a)});
        cbs_sum[a] += scores.at(a);
        rscore_sum[a] += avg.at(a);
      }
      s.front = pareto_front(s.points);
      result.per_seed.push_back(std::move(s));
    }
    const double seeds = static_cast<double>(plan.seeds.size());
    std::vector<CostPoint> points;
    for (AlgorithmId a : plan.algorithms) {
      points.push_back({a, cbs_sum[a] / seeds, rscore_sum[a] / seeds});
    }
    const auto front = pareto_front(points);
    for (const auto& p : points) {
      const bool on = std::any_of(front.begin(), front.end(),
                                  [&](const CostPoint& f) {
                                    return f.algorithm == p.algorithm;
                                  });
      result.summary.push_back({delta, p, on});
    }
  }
  result.records = std::move(records);
  return result;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  validate(plan);
  const Capacity c(plan.capacity);
  std::vector<ExperimentRecord> records;
  records.reserve(plan.deltas.size() * plan.seeds.size() *
                  plan.algorithms.size() * plan.stream_length);
  for (double delta : plan.deltas) {
    for (std::uint64_t seed : plan.seeds) {
      const Stream stream = generate(stream_spec_for(plan, delta, seed));
      for (const auto& r : run_stream(plan.algorithms, stream, c)) {
        records.push_back({delta, seed, r});
      }
    }
  }
  return summarize(std::move(records), plan);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       std::ostream& os) {
  os << "delta,seed,algorithm,iteration,bins,rscore\n";
  for (const auto& r : records) {
    os << format_number(r.delta) << ',' << r.seed << ','
       << to_string(r.record.algorithm) << ',' << r.record.iteration << ','
       << r.record.bins << ',' << format_number(r.record.rscore) << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& os) {
  os << "delta,algorithm,cbs,avg_rscore,on_pareto\n";
  for (const auto& r : rows) {
    os << format_number(r.delta) << ',' << to_string(r.point.algorithm) << ','
       << format_number(r.point.cbs) << ',' << format_number(r.point.avg_rscore)
       << ',' << (r.on_pareto ? 1 : 0) << '\n';
  }
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParseError,
                "summary line " + std::to_string(line) + ": bad number '" +
                    std::string(field) + "'");
  }
  return v;
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  writer(os);
  if (!os) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace

std::vector<SummaryRow> parse_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "delta,algorithm,cbs,avg_rscore,on_pareto") {
    throw Error(ErrorCode::kParseError, "summary header missing or wrong");
  }
  std::vector<SummaryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5) {
      throw Error(ErrorCode::kParseError,
                  "summary line " + std::to_string(lineno) + ": expected 5 fields");
    }
    auto algo = parse_algorithm(fields[1]);
    if (!algo) {
      throw Error(ErrorCode::kParseError,
                  "summary line " + std::to_string(lineno) + ": unknown algorithm");
    }
    if (fields[4] != "0" && fields[4] != "1") {
      throw Error(ErrorCode::kParseError,
                  "summary line " + std::to_string(lineno) + ": bad on_pareto");
    }
    rows.push_back({parse_double(fields[0], lineno),
                    {*algo, parse_double(fields[2], lineno),
                     parse_double(fields[3], lineno)},
                    fields[4] == "1"});
  }
  return rows;
}

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& os) { write_records_csv(records, os); });
}

void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& os) { write_summary_csv(rows, os); });
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return parse_summary_csv(is);
}

std::vector<SummaryRow> pareto_rows(const std::vector<SummaryRow>& rows,
                                    double delta) {
  std::vector<CostPoint> points;
  for (const auto& r : rows) {
    if (r.delta == delta) points.push_back(r.point);
  }
  if (points.empty()) {
    throw Error(ErrorCode::kUnknownDelta,
                "no summary rows for delta " + format_number(delta));
  }
  std::vector<SummaryRow> out;
  for (const auto& p : pareto_front(points)) out.push_back({delta, p, true});
  return out;
}

}  // namespace autoscale
