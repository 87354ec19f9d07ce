#include "compsolve/cli.hpp"
#include "compsolve/errors.hpp"
#include "compsolve/io.hpp"
#include "compsolve/problems.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace compsolve;

namespace {

Json trace_to_json(const SolveTrace& t)
{
  Json j = trace_summary(t);
  j["x"] = std::vector<double>(t.x.data(), t.x.data() + t.x.size());
  Json rows = Json::array();
  for (const auto& r : t.iterates)
    rows.push_back({r.m, r.res_norm, r.df0_norm, r.step_norm, r.telescoping_defect});
  j["iterates"] = rows;
  return j;
}

SamplerConfig sampler_from(const std::string& desc, std::uint64_t seed)
{
  return sampler_from_json(desc.empty() ? Json::object() : parse_json(desc), seed);
}

} // namespace

PYBIND11_MODULE(_compsolve, m)
{
  m.doc() = "Surrogate-comparison solver core";

  py::register_exception<Error>(m, "Error");

  m.def("lp_norm", [](const Vec& x, double p) { return Space::lp(static_cast<int>(x.size()), p).norm(x); });
  m.def("duality_map", [](const Vec& x, double p) { return Space::lp(static_cast<int>(x.size()), p).duality_map(x); });

  py::class_<Decomposition>(m, "Decomposition")
    .def("f", &Decomposition::eval_f)
    .def("f0", &Decomposition::eval_f0)
    .def("f1", &Decomposition::eval_f1)
    .def_property_readonly("dim", [](const Decomposition& d) { return d.f.domain().dim(); })
    .def_property_readonly("radius", [](const Decomposition& d) { return d.f.ball().radius; });

  m.def("build_fixture", [](const std::string& desc) { return build_fixture(parse_json(desc)); });

  m.def(
    "certify",
    [](const Decomposition& d, const std::string& sampler, std::uint64_t seed) {
      return report_to_json(certify(d, sampler_from(sampler, seed))).dump();
    },
    py::arg("decomposition"), py::arg("sampler") = "", py::arg("seed") = 0);

  m.def(
    "solve",
    [](const Decomposition& d, const Vec& target, std::optional<Vec> start, const std::string& solver) {
      const auto cfg = solver_from_json(solver.empty() ? Json::object() : Json{{"solver", parse_json(solver)}}, 0);
      const Vec x0 = start ? *start : d.f.ball().center;
      return trace_to_json(solve_comparison(d, target, x0, cfg)).dump();
    },
    py::arg("decomposition"), py::arg("target"), py::arg("start") = py::none(), py::arg("solver") = "");

  m.def(
    "run",
    [](const std::string& command, const std::string& input, const std::string& out, std::uint64_t seed,
       std::vector<std::string> overrides) {
      RunConfig cfg;
      cfg.command = command;
      cfg.input_path = input;
      cfg.output_dir = out;
      cfg.seed = seed;
      cfg.overrides = std::move(overrides);
      std::ostringstream s;
      const int code = run(cfg, s);
      return py::make_tuple(code, s.str());
    },
    py::arg("command"), py::arg("input"), py::arg("out") = ".", py::arg("seed") = 0,
    py::arg("overrides") = std::vector<std::string>{});
}
