// Python bindings: instances, exact and sampled F evaluations, the search,
// the heuristic, the probing MIP and the CLI entry point.
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pesp/bnb.hpp"
#include "pesp/cli.hpp"
#include "pesp/errors.hpp"
#include "pesp/heuristic.hpp"
#include "pesp/mipgen.hpp"
#include "pesp/sampling.hpp"

namespace py = pybind11;
using namespace pesp;

namespace {

IndexSet to_set(const std::vector<int>& items) { return IndexSet::from_vector(items); }

py::dict estimate(const BoundEstimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["std_error"] = e.std_error;
  d["batches"] = e.batches;
  d["statistical"] = e.mode == EstimateMode::Statistical;
  return d;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

InternalSpec internal_spec(int outer, int batches, int inner) {
  InternalSpec s;
  s.outer = outer;
  s.batches = batches;
  s.inner = inner;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Probing-enhanced stochastic programs";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  py::class_<Instance>(m, "Instance")
      .def_static(
          "generate",
          [](int facilities, int configs, int customers, const std::string& kind, std::uint64_t seed,
             double capacity_min, double capacity_max) {
            GeneratorOptions o;
            o.capacity_min = capacity_min;
            o.capacity_max = capacity_max;
            return generate_instance(facilities, configs, customers, parse_distribution_kind(kind), seed, o);
          },
          py::arg("facilities"), py::arg("configs"), py::arg("customers"), py::arg("kind") = "bernoulli",
          py::arg("seed") = 0, py::arg("capacity_min") = GeneratorOptions{}.capacity_min,
          py::arg("capacity_max") = GeneratorOptions{}.capacity_max)
      .def_static("from_json", [](const std::string& text) { return instance_from_json(nlohmann::json::parse(text)); })
      .def_static("load", &load_instance)
      .def("to_json", [](const Instance& inst) { return to_json(inst).dump(); })
      .def("save", [](const Instance& inst, const std::string& path) { save_instance(inst, path); })
      .def_readwrite("name", &Instance::name)
      .def_property_readonly("n_customers", &Instance::n_customers)
      .def_property_readonly("n_facilities", &Instance::n_facilities);

  m.def("probe_cost", [](const Instance& inst, const std::vector<int>& s) { return alpha(inst, to_set(s)); },
        py::arg("instance"), py::arg("probes"));

  m.def(
      "f_exact", [](const Instance& inst, const std::vector<int>& s) { return f_exact(inst, to_set(s)).mean; },
      py::arg("instance"), py::arg("probes"), "Expected conditional recourse by full enumeration.");

  m.def(
      "internal_ub",
      [](const Instance& inst, const std::vector<int>& s, std::uint64_t seed, int outer, int batches, int inner) {
        return estimate(internal_ub(inst, to_set(s), internal_spec(outer, batches, inner), {}, seed));
      },
      py::arg("instance"), py::arg("probes"), py::arg("seed"), py::arg("outer") = InternalSpec{}.outer,
      py::arg("batches") = InternalSpec{}.batches, py::arg("inner") = InternalSpec{}.inner);

  m.def(
      "stat_lb",
      [](const Instance& inst, const std::vector<int>& s, std::uint64_t seed, int outer, int inner, int selection) {
        const auto lb = stat_lb(inst, to_set(s), LowerBoundSpec{outer, inner, selection}, {}, seed);
        py::dict d = estimate(lb.estimate);
        d["ci_lower"] = lb.ci_lower;
        return d;
      },
      py::arg("instance"), py::arg("probes"), py::arg("seed"), py::arg("outer") = LowerBoundSpec{}.outer,
      py::arg("inner") = LowerBoundSpec{}.inner, py::arg("selection") = LowerBoundSpec{}.selection);

  m.def(
      "solve_exact",
      [](const Instance& inst, const std::string& branching, std::uint64_t seed) {
        ExactEvaluator eval(inst);
        WorkCounters counters;
        BnbOptions opt;
        opt.branching = parse_branching(branching);
        opt.seed = seed;
        py::gil_scoped_release release;
        const auto report = run_bnb(inst, eval, opt, counters);
        py::gil_scoped_acquire acquire;
        return json_to_py(report.to_json());
      },
      py::arg("instance"), py::arg("branching") = "multi", py::arg("seed") = 0,
      "Exact branch-and-bound over probe sets; returns the search summary.");

  m.def(
      "greedy_pool",
      [](const Instance& inst, std::uint64_t seed, bool weighted_clusters) {
        HeuristicSpec spec;
        spec.weighted_clusters = weighted_clusters;
        const auto pool = greedy_run(inst, spec, seed);
        py::list out;
        for (const auto& e : pool.entries) {
          py::dict d;
          d["set"] = e.set.items();
          d["approx_f"] = e.approx_f;
          d["approx_net"] = e.approx_net;
          out.append(d);
        }
        return out;
      },
      py::arg("instance"), py::arg("seed"), py::arg("weighted_clusters") = false);

  m.def(
      "na_mip_mps",
      [](const Instance& inst) {
        std::ostringstream out;
        write_mps(build_na_mip(inst).model, out);
        return out.str();
      },
      py::arg("instance"), "The probing MIP over the full outcome support, as MPS text.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one CLI command in-process; returns (exit code, stdout, stderr).");
}
