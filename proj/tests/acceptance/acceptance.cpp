// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "autoscale/harness.hpp"
#include "autoscale/metrics.hpp"
#include "autoscale/monitor.hpp"
#include "autoscale/packing.hpp"
#include "autoscale/simulation.hpp"
#include "autoscale/stream.hpp"

using namespace autoscale;
using A = AlgorithmId;

namespace {

constexpr double kC = 2.3e6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Criterion 1
Outcome rscore_exactness() {
  const Capacity c(kC);
  const Measurement m{{"p0", 1.15e6}, {"p1", 1.15e6}};
  const double empty = rscore({}, m, c);
  const double both = rscore({PartitionId("p0"), PartitionId("p1")}, m, c);
  const double via_sets =
      rscore(rebalanced_set(Assignment{{"p0", 0}, {"p1", 0}}, Assignment{{"p0", 1}, {"p1", 2}}),
             m, c);
  std::ostringstream os;
  os << "empty=" << format_number(empty) << " two-halves=" << format_number(both)
     << " via-rebalanced-set=" << format_number(via_sets);
  return {empty == 0.0 && both == 1.0 && via_sets == 1.0, os.str()};
}

// Criterion 2
Outcome zero_delta_stability() {
  const A modified[] = {A::kMWF, A::kMBF, A::kMWFP, A::kMBFP};
  const InitStrategy inits[] = {InitStrategy::kUniformRandom, InitStrategy::kAllZero,
                                InitStrategy::kHalfCapacity, InitStrategy::kFullCapacity};
  std::ostringstream bad;
  std::size_t failures = 0, runs = 0;
  for (InitStrategy init : inits) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      StreamSpec spec;
      spec.partitions = 100;
      spec.length = 500;
      spec.delta = 0.0;
      spec.capacity = kC;
      spec.init = init;
      spec.seed = seed;
      const Stream stream = generate(spec);
      const auto records = run_stream({std::begin(modified), std::end(modified)}, stream,
                                      Capacity(kC));
      std::map<A, std::size_t> last_nonzero;
      for (const auto& r : records) {
        if (r.iteration >= 2 && r.rscore != 0.0) last_nonzero[r.algorithm] = r.iteration;
      }
      for (A a : modified) {
        ++runs;
        if (!last_nonzero.count(a)) continue;
        ++failures;
        bad << ' ' << to_string(a) << '/' << to_string(init) << "/seed" << seed
            << "(last nonzero i=" << last_nonzero[a] << ')';
      }
    }
  }
  std::ostringstream os;
  os << failures << " of " << runs << " (algorithm, init, seed) runs had Rscore > 0 at i >= 2";
  if (failures) os << ":" << bad.str();
  return {failures == 0, os.str()};
}

// Criterion 3
Outcome apr_bounds() {
  const Capacity c(kC);
  std::size_t instances = 0, violations = 0;
  std::string first_bad;
  std::vector<int> items;
  std::function<void(int)> rec = [&](int smallest) {
    if (!items.empty()) {
      ++instances;
      std::map<PartitionId, double> speeds;
      for (std::size_t i = 0; i < items.size(); ++i) {
        speeds.emplace(PartitionId("i" + std::to_string(i)), items[i] * kC / 10.0);
      }
      const Measurement m(std::move(speeds));
      const double opt = static_cast<double>(exact_pack(m, c));
      const auto ffd = pack_classic(A::kFFD, m, {}, c).bin_count();
      const auto bfd = pack_classic(A::kBFD, m, {}, c).bin_count();
      const auto nfd = pack_classic(A::kNFD, m, {}, c).bin_count();
      const double fit_bound = std::ceil(11.0 / 9.0 * opt) + 1.0;
      const double next_bound = std::ceil(1.691 * opt) + 1.0;
      if (ffd > fit_bound || bfd > fit_bound || nfd > next_bound) {
        if (first_bad.empty()) {
          std::ostringstream os;
          for (int v : items) os << v << ' ';
          first_bad = os.str();
        }
        ++violations;
      }
    }
    if (items.size() == 8) return;
    for (int v = smallest; v <= 10; ++v) {
      items.push_back(v);
      rec(v);
      items.pop_back();
    }
  };
  rec(1);
  std::ostringstream os;
  os << instances << " multisets checked against the exact oracle, " << violations
     << " bound violations";
  if (!first_bad.empty()) os << " (first: tenths " << first_bad << ")";
  return {violations == 0 && instances == 43757, os.str()};
}

struct Benchmark {
  ExperimentPlan plan;
  ExperimentResult result;
};

const Benchmark& default_benchmark() {
  static const Benchmark b = [] {
    Benchmark out;
    out.result = run_experiment(out.plan);
    return out;
  }();
  return b;
}

const SeedSummary& seed_summary(const Benchmark& b, double delta, std::uint64_t seed) {
  for (const auto& s : b.result.per_seed) {
    if (s.delta == delta && s.seed == seed) return s;
  }
  throw std::runtime_error("missing seed summary");
}

double cbs_of(const SeedSummary& s, A a) {
  for (const auto& p : s.points) {
    if (p.algorithm == a) return p.cbs;
  }
  throw std::runtime_error("missing algorithm");
}

// Criterion 4
Outcome cbs_ordering() {
  const Benchmark& b = default_benchmark();
  const A classic[] = {A::kNF, A::kNFD, A::kFF, A::kFFD, A::kBF, A::kBFD, A::kWF, A::kWFD};
  std::ostringstream os;
  bool pass = true;
  for (double delta : {5.0, 10.0, 15.0, 20.0, 25.0}) {
    int good = 0;
    for (std::uint64_t seed : b.plan.seeds) {
      const SeedSummary& s = seed_summary(b, delta, seed);
      const double nf = cbs_of(s, A::kNF), nfd = cbs_of(s, A::kNFD), bfd = cbs_of(s, A::kBFD);
      bool ok = true;
      for (A a : kAllAlgorithms) {
        if (a != A::kNF && !(nf > cbs_of(s, a))) ok = false;
        if (a != A::kNF && a != A::kNFD && !(nfd > cbs_of(s, a))) ok = false;
      }
      for (A a : classic) {
        if (bfd > cbs_of(s, a)) ok = false;
      }
      good += ok;
    }
    os << " d=" << format_number(delta) << ":" << good << "/5";
    if (good < 4) pass = false;
  }
  return {pass, "seeds with NF > NFD > rest and BFD lowest classic:" + os.str()};
}

// Criterion 5
Outcome rscore_trend() {
  const Benchmark& b = default_benchmark();
  std::map<A, std::vector<double>> by_algo;
  for (double delta : b.plan.deltas) {
    for (const auto& row : b.result.summary) {
      if (row.delta == delta) by_algo[row.point.algorithm].push_back(row.point.avg_rscore);
    }
  }
  bool pass = true;
  std::ostringstream os;
  for (A a : kAllAlgorithms) {
    const auto& v = by_algo[a];
    int breaks = 0;
    for (std::size_t i = 1; i < v.size(); ++i) breaks += !(v[i] > v[i - 1]);
    if (breaks > 1) {
      pass = false;
      os << ' ' << to_string(a) << '(' << breaks << " breaks)";
    }
  }
  std::string detail = "Average Rscore increasing over delta 0..25 for all 12 algorithms";
  if (!pass) detail = "too many non-increasing steps:" + os.str();
  return {pass, detail};
}

// Criterion 6
Outcome pareto_membership() {
  const Benchmark& b = default_benchmark();
  bool pass = true;
  std::ostringstream os;
  for (double delta : {5.0, 25.0}) {
    for (A a : {A::kMWF, A::kMBF, A::kMBFP}) {
      int on = 0;
      for (std::uint64_t seed : b.plan.seeds) {
        const auto& front = seed_summary(b, delta, seed).front;
        on += std::any_of(front.begin(), front.end(),
                          [&](const CostPoint& p) { return p.algorithm == a; });
      }
      os << ' ' << to_string(a) << "@d" << format_number(delta) << '=' << on << "/5";
      if (on < 4) pass = false;
    }
  }
  return {pass, "front membership:" + os.str()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AUTOSCALE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Criterion 7
Outcome controller_safety() {
  Scenario s = builtin_scenario("drift-25");
  s.ticks = 10000;
  const SimulationResult r = run_simulation(s);
  std::size_t world = 0;
  for (const auto& v : r.violations) world += v.detail.find("owned by") != std::string::npos;
  const auto ordering = check_event_log(r.events, s.initial_assignment).size();
  const auto out = std::filesystem::temp_directory_path() / "autoscale-acceptance-ds";
  const int code = run_cli("simulate --scenario double-start --out " + out.string());
  std::filesystem::remove_all(out);
  std::ostringstream os;
  os << "drift-25 over " << s.ticks << " ticks: " << r.reassignments << " reassignments, "
     << world << " exclusion violations, " << ordering
     << " start-before-stop-ack; double-start fixture exit code " << code;
  return {r.violations.empty() && r.reassignments > 0 && code == 3, os.str()};
}

// Criterion 8
Outcome adequacy() {
  Scenario s = builtin_scenario("steady-60pct");
  s.ticks = 10000;
  const SimulationResult r = run_simulation(s);
  const std::size_t from = static_cast<std::size_t>(r.last_rebalance_done.value_or(0));
  const double ceiling = r.total_lag[from] + r.total_speed;
  double peak = 0.0;
  for (std::size_t t = from; t < r.total_lag.size(); ++t) peak = std::max(peak, r.total_lag[t]);
  std::ostringstream os;
  os << "final rebalance done at tick " << from << ", lag then " << format_number(r.total_lag[from])
     << " B, later max " << format_number(peak) << " B, ceiling " << format_number(ceiling)
     << " B, violations " << r.violations.size();
  return {lag_adequate(r) && r.violations.empty(), os.str()};
}

// Criterion 9
Outcome monitor_estimator() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> speed(0.0, 1e7);
  const PartitionId p("p");
  double worst = 0.0;
  std::size_t stale = 0, published = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double s = trial == 0 ? kC : speed(rng);
    const double base = speed(rng) * 1000.0;
    Monitor mon;
    for (int t = 0; t <= 300; ++t) {
      auto m = mon.observe(t, {{p, base + s * t}});
      for (const auto& sample : mon.window().samples(p)) stale += sample.t < t - 30.0;
      if (m) {
        ++published;
        worst = std::max(worst, std::abs(m->speed(p) - s) / std::max(s, 1.0));
      }
    }
  }
  std::ostringstream os;
  os << published << " publications, worst relative error " << worst << ", stale samples "
     << stale;
  return {worst <= 1e-9 && stale == 0 && published > 0, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rscore exactness", rscore_exactness},
      {"delta=0 stability of modified algorithms", zero_delta_stability},
      {"APR bounds vs exact oracle", apr_bounds},
      {"CBS ordering (NF, NFD worst; BFD best classic)", cbs_ordering},
      {"Average Rscore grows with delta", rscore_trend},
      {"MWF, MBF, MBFP on the Pareto front", pareto_membership},
      {"controller safety", controller_safety},
      {"lag adequacy in steady-60pct", adequacy},
      {"monitor estimator exactness", monitor_estimator},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("criterion %zu: %s  %s  [%s] (%.2fs)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
