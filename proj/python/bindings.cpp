#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "autoscale/error.hpp"
#include "autoscale/metrics.hpp"
#include "autoscale/monitor.hpp"
#include "autoscale/packing.hpp"
#include "autoscale/harness.hpp"
#include "autoscale/simulation.hpp"
#include "autoscale/stream.hpp"

namespace py = pybind11;
using namespace autoscale;

namespace {

using Speeds = std::map<std::string, double>;
using Placement = std::map<std::string, ConsumerIndex>;

Measurement to_measurement(const Speeds& speeds) {
  std::map<PartitionId, double> m;
  for (const auto& [id, s] : speeds) m.emplace(PartitionId(id), s);
  return Measurement(std::move(m));
}

Assignment to_assignment(const Placement& placement) {
  Assignment a;
  for (const auto& [id, k] : placement) a.assign(PartitionId(id), k);
  return a;
}

Placement from_assignment(const Assignment& a) {
  Placement out;
  for (const auto& [p, k] : a.placement()) out.emplace(p.str(), k);
  return out;
}

std::set<PartitionId> to_ids(const std::set<std::string>& ids) {
  std::set<PartitionId> out;
  for (const auto& id : ids) out.insert(PartitionId(id));
  return out;
}

AlgorithmId algorithm(const std::string& name) {
  auto a = parse_algorithm(name);
  if (!a) throw Error(ErrorCode::kParseError, "unknown algorithm '" + name + "'");
  return *a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rebalance-aware bin packing for consumer-group autoscaling";

  static py::exception<Error> error_type(m, "AutoscaleError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(error_type.ptr())(
          std::string(to_string(e.code())) + ": " + e.what());
      err.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  m.def("algorithms", [] {
    std::vector<std::string> out;
    for (AlgorithmId a : kAllAlgorithms) out.emplace_back(to_string(a));
    return out;
  });

  m.def(
      "pack",
      [](const std::string& algo, const Speeds& speeds, const Placement& prev,
         double capacity) {
        return from_assignment(
            pack(algorithm(algo), to_measurement(speeds), to_assignment(prev), Capacity(capacity)));
      },
      py::arg("algorithm"), py::arg("measurement"), py::arg("prev") = Placement{},
      py::arg("capacity") = 2.3e6);

  m.def(
      "pack_modified",
      [](const std::string& algo, const Speeds& speeds, const Placement& prev,
         const std::set<std::string>& unassigned, double capacity) {
        return from_assignment(pack_modified(algorithm(algo), to_measurement(speeds),
                                             to_assignment(prev), to_ids(unassigned),
                                             Capacity(capacity)));
      },
      py::arg("algorithm"), py::arg("measurement"), py::arg("prev"),
      py::arg("unassigned"), py::arg("capacity") = 2.3e6);

  m.def(
      "lower_bound",
      [](const Speeds& speeds, double capacity) {
        return lower_bound(to_measurement(speeds), Capacity(capacity));
      },
      py::arg("measurement"), py::arg("capacity") = 2.3e6);

  m.def(
      "exact_pack",
      [](const Speeds& speeds, double capacity) {
        return exact_pack(to_measurement(speeds), Capacity(capacity));
      },
      py::arg("measurement"), py::arg("capacity") = 2.3e6);

  m.def("rebalanced_set", [](const Placement& prev, const Placement& next) {
    std::set<std::string> out;
    for (const auto& p : rebalanced_set(to_assignment(prev), to_assignment(next))) {
      out.insert(p.str());
    }
    return out;
  });

  m.def(
      "rscore",
      [](const std::set<std::string>& ids, const Speeds& speeds, double capacity) {
        return rscore(to_ids(ids), to_measurement(speeds), Capacity(capacity));
      },
      py::arg("partitions"), py::arg("measurement"), py::arg("capacity") = 2.3e6);

  m.def("cbs", [](const std::map<std::string, std::vector<std::size_t>>& counts) {
    std::map<AlgorithmId, std::vector<std::size_t>> in;
    for (const auto& [name, z] : counts) in.emplace(algorithm(name), z);
    std::map<std::string, double> out;
    for (const auto& [a, v] : cbs(in)) out.emplace(std::string(to_string(a)), v);
    return out;
  });

  m.def("avg_rscore", [](const std::vector<double>& r) { return avg_rscore(r); });

  m.def("pareto_front",
        [](const std::vector<std::tuple<std::string, double, double>>& points) {
          std::vector<CostPoint> in;
          for (const auto& [name, c, r] : points) in.push_back({algorithm(name), c, r});
          std::vector<std::tuple<std::string, double, double>> out;
          for (const auto& p : pareto_front(in)) {
            out.emplace_back(std::string(to_string(p.algorithm)), p.cbs, p.avg_rscore);
          }
          return out;
        });

  m.def(
      "generate_stream",
      [](std::size_t partitions, std::size_t length, double delta, double capacity,
         const std::string& init, std::uint64_t seed) {
        StreamSpec spec;
        spec.partitions = partitions;
        spec.length = length;
        spec.delta = delta;
        spec.capacity = capacity;
        spec.init = parse_init_strategy(init);
        spec.seed = seed;
        const Stream s = generate(spec);
        std::vector<Speeds> out;
        for (const auto& meas : s.measurements) {
          Speeds row;
          for (const auto& [p, v] : meas.speeds()) row.emplace(p.str(), v);
          out.push_back(std::move(row));
        }
        return out;
      },
      py::arg("partitions") = 100, py::arg("length") = 500, py::arg("delta") = 0.0,
      py::arg("capacity") = 2.3e6, py::arg("init") = "uniform", py::arg("seed") = 1);

  m.def(
      "run_stream",
      [](const std::vector<std::string>& algos, const std::vector<Speeds>& stream,
         double capacity) {
        std::vector<AlgorithmId> ids;
        for (const auto& a : algos) ids.push_back(algorithm(a));
        Stream s;
        for (const auto& row : stream) s.measurements.push_back(to_measurement(row));
        std::vector<std::tuple<std::string, std::size_t, std::size_t, double>> out;
        for (const auto& r : run_stream(ids, s, Capacity(capacity))) {
          out.emplace_back(std::string(to_string(r.algorithm)), r.iteration, r.bins,
                           r.rscore);
        }
        return out;
      },
      py::arg("algorithms"), py::arg("stream"), py::arg("capacity") = 2.3e6);

  m.def(
      "monitor_estimate",
      [](const std::vector<std::pair<double, double>>& samples, double horizon) {
        MonitorWindow w(horizon);
        const PartitionId p("p");
        for (const auto& [t, size] : samples) w.append(p, t, size);
        return monitor_estimate(w, p);
      },
      py::arg("samples"), py::arg("horizon") = 30.0);

  m.def(
      "simulate",
      [](const std::string& scenario, std::int64_t ticks) {
        Scenario s = scenario.find('{') != std::string::npos ? parse_scenario(scenario)
                                                             : builtin_scenario(scenario);
        if (ticks >= 0) s.ticks = ticks;
        const SimulationResult r = run_simulation(s);
        py::dict out;
        out["reassignments"] = r.reassignments;
        out["timeouts"] = r.timeouts;
        out["violations"] = r.violations.size();
        out["consumers"] = r.consumers;
        out["total_lag"] = r.total_lag;
        out["lag_adequate"] = lag_adequate(r);
        out["final_assignment"] = from_assignment(r.final_assignment);
        return out;
      },
      py::arg("scenario"), py::arg("ticks") = -1);
}
