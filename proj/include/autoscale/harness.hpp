#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "autoscale/metrics.hpp"
#include "autoscale/stream.hpp"

namespace autoscale {

struct ExperimentPlan {
  std::vector<double> deltas = {0, 5, 10, 15, 20, 25};
  std::size_t stream_length = 500;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<AlgorithmId> algorithms = {kAllAlgorithms.begin(),
                                         kAllAlgorithms.end()};
  double capacity = 2.3e6;
  std::size_t partitions = 100;
  InitStrategy init = InitStrategy::kUniformRandom;
};

void validate(const ExperimentPlan& plan);

// Stream a plan cell is evaluated on; the stream seed is the plan seed.
StreamSpec stream_spec_for(const ExperimentPlan& plan, double delta,
                           std::uint64_t seed);

// Every algorithm replays the stream on its own: iteration 0 starts from an
// empty assignment, iteration i >= 1 from that algorithm's previous output.
// Records are grouped by algorithm (in the given order), then iteration.
std::vector<IterationRecord> run_stream(const std::vector<AlgorithmId>& algorithms,
                                        const Stream& stream, Capacity c);

struct ExperimentRecord {
  double delta = 0.0;
  std::uint64_t seed = 0;
  IterationRecord record;
};

struct SummaryRow {
  double delta = 0.0;
  CostPoint point;
  bool on_pareto = false;
};

struct SeedSummary {
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::vector<CostPoint> points;  // plan algorithm order
  std::vector<CostPoint> front;
};

struct ExperimentResult {
  std::vector<ExperimentRecord> records;
  std::vector<SeedSummary> per_seed;
  std::vector<SummaryRow> summary;  // per delta, plan algorithm order
};

// CBS and Average Rscore per (delta, seed) with the per-iteration minimum
// taken over the plan's algorithms, then averaged over seeds; Pareto fronts
// per delta on the seed-averaged points. Throws kIncompleteRecords when a
// (delta, seed, algorithm) series is missing or has the wrong length.
ExperimentResult summarize(std::vector<ExperimentRecord> records,
                           const ExperimentPlan& plan);

ExperimentResult run_experiment(const ExperimentPlan& plan);

// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       std::ostream& os);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& os);
std::vector<SummaryRow> parse_summary_csv(std::istream& is);

void write_records_csv(const std::vector<ExperimentRecord>& records,
                       const std::filesystem::path& path);
void write_summary_csv(const std::vector<SummaryRow>& rows,
                       const std::filesystem::path& path);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

// Pareto subset of the rows for one delta (on_pareto set). Throws
// kUnknownDelta when no row carries that delta.
std::vector<SummaryRow> pareto_rows(const std::vector<SummaryRow>& rows,
                                    double delta);

}  // namespace autoscale
