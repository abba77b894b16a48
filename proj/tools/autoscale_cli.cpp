#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "autoscale/algorithm.hpp"
#include "autoscale/error.hpp"
#include "autoscale/harness.hpp"
#include "autoscale/simulation.hpp"
#include "autoscale/stream.hpp"

namespace fs = std::filesystem;
using namespace autoscale;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitInvariant = 3;

struct Options {
  double delta = 0.0;
  std::vector<double> deltas = {0, 5, 10, 15, 20, 25};
  std::size_t n = 500;
  std::size_t partitions = 100;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string init = "uniform";
  double capacity = 2.3e6;
  std::string algorithms;
  std::string out = ".";
  std::string summary;
  std::string scenario;
  std::int64_t ticks = -1;
  std::int64_t ack_timeout = -1;
  int hysteresis = -1;
};

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string());
  return dir;
}

std::vector<AlgorithmId> algorithms_of(const Options& o) {
  if (o.algorithms.empty()) return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
  return parse_algorithm_list(o.algorithms);
}

int gen_stream(const Options& o) {
  StreamSpec spec;
  spec.partitions = o.partitions;
  spec.length = o.n;
  spec.delta = o.delta;
  spec.capacity = o.capacity;
  spec.init = parse_init_strategy(o.init);
  spec.seed = o.seed;
  validate(spec);
  const Stream stream = generate(spec);
  const fs::path path = out_dir(o) / ("stream-delta" + format_number(o.delta) + "-seed" +
                                      std::to_string(o.seed) + ".json");
  write_stream(stream, path);
  std::cout << path.string() << ' ' << content_digest(serialize(stream)) << '\n';
  return kExitOk;
}

void print_table(const std::vector<SummaryRow>& rows, const ExperimentPlan& plan,
                 bool cbs_column) {
  std::cout << (cbs_column ? "CBS" : "Average Rscore") << '\n';
  std::cout << std::left << std::setw(8) << "algo";
  for (double d : plan.deltas) {
    std::cout << std::right << std::setw(12) << ("d=" + format_number(d));
  }
  std::cout << '\n';
  std::map<std::pair<AlgorithmId, double>, double> cell;
  for (const auto& r : rows) {
    cell[{r.point.algorithm, r.delta}] = cbs_column ? r.point.cbs : r.point.avg_rscore;
  }
  for (AlgorithmId a : plan.algorithms) {
    std::cout << std::left << std::setw(8) << to_string(a);
    for (double d : plan.deltas) {
      std::ostringstream v;
      v << std::fixed << std::setprecision(5) << cell[{a, d}];
      std::cout << std::right << std::setw(12) << v.str();
    }
    std::cout << '\n';
  }
}

int bench(const Options& o) {
  ExperimentPlan plan;
  plan.deltas = o.deltas;
  plan.seeds = o.seeds;
  plan.stream_length = o.n;
  plan.partitions = o.partitions;
  plan.capacity = o.capacity;
  plan.init = parse_init_strategy(o.init);
  plan.algorithms = algorithms_of(o);
  validate(plan);
  const fs::path dir = out_dir(o);
  const ExperimentResult result = run_experiment(plan);
  write_records_csv(result.records, dir / "records.csv");
  write_summary_csv(result.summary, dir / "summary.csv");
  print_table(result.summary, plan, true);
  std::cout << '\n';
  print_table(result.summary, plan, false);
  std::cout << "wrote " << (dir / "records.csv").string() << " and "
            << (dir / "summary.csv").string() << '\n';
  return kExitOk;
}

int pareto(const Options& o) {
  const auto rows = read_summary_csv(o.summary);
  const auto front = pareto_rows(rows, o.delta);
  const fs::path path = out_dir(o) / "pareto.csv";
  write_summary_csv(front, path);
  for (const auto& r : front) {
    std::cout << to_string(r.point.algorithm) << ' ' << format_number(r.point.cbs)
              << ' ' << format_number(r.point.avg_rscore) << '\n';
  }
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

int simulate(const Options& o) {
  Scenario s;
  if (fs::exists(o.scenario)) {
    s = read_scenario(o.scenario);
  } else {
    s = builtin_scenario(o.scenario);
  }
  if (o.ticks >= 0) s.ticks = o.ticks;
  if (o.ack_timeout >= 0) s.controller.ack_timeout_ticks = o.ack_timeout;
  if (o.hysteresis >= 0) s.controller.policy.hysteresis_cycles = o.hysteresis;
  if (!o.algorithms.empty()) {
    const auto algos = parse_algorithm_list(o.algorithms);
    if (algos.size() != 1) {
      throw Error(ErrorCode::kInvalidSpec, "simulate takes exactly one algorithm");
    }
    s.controller.algorithm = algos.front();
  }
  validate(s);

  const fs::path dir = out_dir(o);
  const fs::path lag_path = dir / "lag.jsonl";
  const fs::path events_path = dir / "controller.jsonl";
  std::ofstream lag(lag_path, std::ios::binary);
  if (!lag) throw Error(ErrorCode::kIoError, "cannot write " + lag_path.string());
  const SimulationResult r = run_simulation(s, &lag);
  std::ofstream events(events_path, std::ios::binary);
  if (!events) throw Error(ErrorCode::kIoError, "cannot write " + events_path.string());
  for (const auto& e : r.events) write_event_jsonl(e, events);
  if (!lag || !events) throw Error(ErrorCode::kIoError, "trace write failed");

  const std::size_t from = static_cast<std::size_t>(r.last_rebalance_done.value_or(0));
  double peak = 0.0;
  for (std::size_t t = from; t < r.total_lag.size(); ++t) {
    peak = std::max(peak, r.total_lag[t]);
  }
  std::cout << "scenario " << s.name << ": " << s.ticks << " ticks, "
            << r.reassignments << " reassignments, " << r.timeouts
            << " ack timeouts, " << r.consumers.back() << " consumers at end\n";
  std::cout << "max total lag after final rebalance (tick "
            << r.last_rebalance_done.value_or(0) << "): " << format_number(peak)
            << " bytes" << (lag_adequate(r) ? " (bounded)" : " (growing)") << '\n';
  std::cout << "wrote " << events_path.string() << " and " << lag_path.string() << '\n';
  if (!r.violations.empty()) {
    for (const auto& v : r.violations) {
      std::cerr << "invariant violation at tick " << v.tick << ": " << v.detail << '\n';
    }
    return kExitInvariant;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rebalance-aware bin packing for consumer-group autoscaling"};
  app.require_subcommand(1);
  Options o;

  const auto init_check = CLI::IsMember({"uniform", "zero", "half", "full"});
  const auto algo_check = CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          parse_algorithm_list(s);
        } catch (const Error& e) {
          return e.what();
        }
        return {};
      },
      "ALGO[,ALGO...]");

  auto* gen = app.add_subcommand("gen-stream", "Generate a measurement stream");
  gen->add_option("--delta", o.delta, "Max per-iteration change, percent of capacity")
      ->check(CLI::Range(0.0, 100.0));
  gen->add_option("--n", o.n, "Stream length")->check(CLI::PositiveNumber);
  gen->add_option("--partitions", o.partitions, "Partition count")
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", o.seed, "RNG seed");
  gen->add_option("--init", o.init, "Initial speeds")->check(init_check);
  gen->add_option("--capacity", o.capacity, "Consumer capacity, bytes/s")
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", o.out, "Output directory");

  auto* bench_cmd = app.add_subcommand("bench", "Run every algorithm over streams");
  bench_cmd->add_option("--deltas", o.deltas, "Comma-separated deltas")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 100.0));
  bench_cmd->add_option("--seeds", o.seeds, "Comma-separated seeds")->delimiter(',');
  bench_cmd->add_option("--n", o.n, "Stream length")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--partitions", o.partitions, "Partition count")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--init", o.init, "Initial speeds")->check(init_check);
  bench_cmd->add_option("--capacity", o.capacity, "Consumer capacity, bytes/s")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--algorithms", o.algorithms, "Comma-separated algorithms")
      ->check(algo_check);
  bench_cmd->add_option("--out", o.out, "Output directory");

  auto* pareto_cmd = app.add_subcommand("pareto", "Pareto front of one delta");
  pareto_cmd->add_option("summary", o.summary, "summary.csv from bench")->required();
  pareto_cmd->add_option("--delta", o.delta, "Delta to select")->required();
  pareto_cmd->add_option("--out", o.out, "Output directory");

  auto* sim = app.add_subcommand("simulate", "Run the controller against the broker sim");
  sim->add_option("--scenario", o.scenario, "Built-in name or scenario JSON file")
      ->required();
  sim->add_option("--ticks", o.ticks, "Tick budget")->check(CLI::NonNegativeNumber);
  sim->add_option("--ack-timeout", o.ack_timeout, "Ack timeout, ticks")
      ->check(CLI::PositiveNumber);
  sim->add_option("--hysteresis", o.hysteresis, "Scale-down hysteresis, cycles")
      ->check(CLI::PositiveNumber);
  sim->add_option("--algorithms", o.algorithms, "Packing algorithm")->check(algo_check);
  sim->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return gen_stream(o);
    if (*bench_cmd) return bench(o);
    if (*pareto_cmd) return pareto(o);
    if (*sim) return simulate(o);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::kInvalidSpec:
        return kExitUsage;
      case ErrorCode::kInvariantViolation:
        return kExitInvariant;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
