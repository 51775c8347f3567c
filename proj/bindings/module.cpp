#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "greenchain/chain.hpp"
#include "greenchain/embedding.hpp"
#include "greenchain/errors.hpp"
#include "greenchain/green_exact.hpp"
#include "greenchain/io.hpp"
#include "greenchain/mc.hpp"
#include "greenchain/network.hpp"
#include "greenchain/numeric.hpp"
#include "greenchain/rng.hpp"
#include "greenchain/tree.hpp"

namespace py = pybind11;
using namespace greenchain;

namespace {

ProbabilityTriple as_triple(const py::object& obj) {
  if (py::isinstance<ProbabilityTriple>(obj)) {
    return obj.cast<ProbabilityTriple>();
  }
  const auto seq = obj.cast<py::sequence>();
  if (py::len(seq) != 3) {
    throw py::value_error("transition row must be (l, a, r)");
  }
  return ProbabilityTriple{seq[0].cast<double>(), seq[1].cast<double>(),
                           seq[2].cast<double>()};
}

BirthDeathChain make_chain(State lo, State hi, const py::sequence& rows,
                           bool absorb_lo, bool absorb_hi) {
  std::vector<ProbabilityTriple> converted;
  converted.reserve(py::len(rows));
  for (const auto& row : rows) {
    converted.push_back(as_triple(py::reinterpret_borrow<py::object>(row)));
  }
  return BirthDeathChain(lo, hi, std::move(converted), absorb_lo, absorb_hi);
}

CoefficientFn wrap_coefficients(const py::function& fn) {
  return [fn](State n) {
    py::gil_scoped_acquire gil;
    return as_triple(fn(n));
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Green's functions of birth-death chains on lines and trees: exact "
      "fundamental-matrix solve, Brownian-embedding local times, electric "
      "networks, Monte Carlo, and closed-form visit-count ratios.";

  py::register_exception<spec_error>(m, "SpecError", PyExc_ValueError);
  py::register_exception<solver_error>(m, "SolverError", PyExc_RuntimeError);

  py::class_<ProbabilityTriple>(m, "ProbabilityTriple")
      .def(py::init([](double l, double a, double r) {
             return ProbabilityTriple{l, a, r};
           }),
           py::arg("l"), py::arg("a"), py::arg("r"))
      .def_readonly("l", &ProbabilityTriple::l)
      .def_readonly("a", &ProbabilityTriple::a)
      .def_readonly("r", &ProbabilityTriple::r)
      .def("__repr__", [](const ProbabilityTriple& t) {
        return "ProbabilityTriple(l=" + std::to_string(t.l) +
               ", a=" + std::to_string(t.a) + ", r=" + std::to_string(t.r) +
               ")";
      });

  py::class_<Violation>(m, "Violation")
      .def_readonly("state", &Violation::state)
      .def_readonly("message", &Violation::message)
      .def("__repr__",
           [](const Violation& v) { return "Violation(" + v.message + ")"; });

  py::class_<BirthDeathChain>(m, "BirthDeathChain")
      .def(py::init(&make_chain), py::arg("lo"), py::arg("hi"),
           py::arg("rows"), py::arg("absorb_lo"), py::arg("absorb_hi"))
      .def_static(
          "uniform",
          [](State lo, State hi, const py::object& row, bool absorb_lo,
             bool absorb_hi) {
            return BirthDeathChain::uniform(lo, hi, as_triple(row), absorb_lo,
                                            absorb_hi);
          },
          py::arg("lo"), py::arg("hi"), py::arg("row"), py::arg("absorb_lo"),
          py::arg("absorb_hi"))
      .def_property_readonly("lo", &BirthDeathChain::lo)
      .def_property_readonly("hi", &BirthDeathChain::hi)
      .def_property_readonly("absorbing_lo", &BirthDeathChain::absorbing_lo)
      .def_property_readonly("absorbing_hi", &BirthDeathChain::absorbing_hi)
      .def_property_readonly("first_usable", &BirthDeathChain::first_usable)
      .def_property_readonly("last_usable", &BirthDeathChain::last_usable)
      .def("contains", &BirthDeathChain::contains)
      .def("is_absorbing", &BirthDeathChain::is_absorbing)
      .def("is_usable", &BirthDeathChain::is_usable)
      .def("row", &BirthDeathChain::row, py::arg("n"),
           py::return_value_policy::copy)
      .def("validate", &BirthDeathChain::validate)
      .def("require_valid", &BirthDeathChain::require_valid)
      .def("normalized", &BirthDeathChain::normalized);

  m.def("remove_laziness", &remove_laziness, py::arg("chain"));

  py::class_<RatioValue>(m, "RatioValue")
      .def_readonly("value", &RatioValue::value)
      .def_readonly("log", &RatioValue::log)
      .def("reciprocal", &RatioValue::reciprocal)
      .def("__float__", [](const RatioValue& r) { return r.value; })
      .def("__repr__", [](const RatioValue& r) {
        return "RatioValue(value=" + std::to_string(r.value) + ")";
      });

  m.def("symmetry_ratio", &symmetry_ratio, py::arg("chain"), py::arg("j"),
        py::arg("k"));

  py::enum_<Route>(m, "Route")
      .value("Exact", Route::Exact)
      .value("LocalTime", Route::LocalTime)
      .value("Voltage", Route::Voltage)
      .value("MonteCarlo", Route::MonteCarlo);

  py::class_<GreenResult>(m, "GreenResult")
      .def_readonly("value", &GreenResult::value)
      .def_readonly("route", &GreenResult::route)
      .def_readonly("std_error", &GreenResult::std_error)
      .def_readonly("residual", &GreenResult::residual)
      .def_readonly("flagged", &GreenResult::flagged)
      .def("__float__", [](const GreenResult& g) { return g.value; })
      .def("__repr__", [](const GreenResult& g) {
        return std::string("GreenResult(value=") + std::to_string(g.value) +
               ", route=" + route_name(g.route) + ")";
      });

  py::class_<GreenMatrix>(m, "GreenMatrix")
      .def_property_readonly("lo", &GreenMatrix::lo)
      .def_property_readonly("hi", &GreenMatrix::hi)
      .def_property_readonly("dim", &GreenMatrix::dim)
      .def_property_readonly("max_residual", &GreenMatrix::max_residual)
      .def("at", &GreenMatrix::at, py::arg("start"), py::arg("target"))
      .def("values", &GreenMatrix::values);

  m.def("green", &green, py::arg("chain"), py::arg("x"), py::arg("y"));
  m.def("green_matrix", &green_matrix, py::arg("chain"));

  py::class_<RatioCheck>(m, "RatioCheck")
      .def_readonly("max_rel_dev", &RatioCheck::max_rel_dev)
      .def_readonly("worst_j", &RatioCheck::worst_j)
      .def_readonly("worst_k", &RatioCheck::worst_k);

  m.def("verify_ratio_identity", &verify_ratio_identity, py::arg("chain"));

  py::class_<Extent>(m, "Extent")
      .def_readonly("value", &Extent::value)
      .def_readonly("finite", &Extent::finite);

  py::class_<EmbeddingData>(m, "EmbeddingData")
      .def_readonly("lo", &EmbeddingData::lo)
      .def_readonly("hi", &EmbeddingData::hi)
      .def_readonly("anchor", &EmbeddingData::anchor)
      .def_readonly("t", &EmbeddingData::t)
      .def_readonly("x", &EmbeddingData::x)
      .def_readonly("log_spacing", &EmbeddingData::log_spacing)
      .def_readonly("x_minus_inf", &EmbeddingData::x_minus_inf)
      .def_readonly("x_plus_inf", &EmbeddingData::x_plus_inf);

  m.def("build_embedding", &build_embedding, py::arg("chain"));
  m.def("expected_local_time", &expected_local_time, py::arg("a"),
        py::arg("b"), py::arg("z"), py::arg("y"));
  m.def("green_via_local_time", &green_via_local_time, py::arg("chain"),
        py::arg("j"), py::arg("k"));

  py::class_<ConductanceNetwork>(m, "ConductanceNetwork")
      .def(py::init<>())
      .def("add_vertex", &ConductanceNetwork::add_vertex)
      .def("add_edge", &ConductanceNetwork::add_edge, py::arg("u"),
           py::arg("v"), py::arg("conductance"))
      .def("set_loop", &ConductanceNetwork::set_loop, py::arg("v"),
           py::arg("conductance"))
      .def("has_vertex", &ConductanceNetwork::has_vertex)
      .def("vertices", &ConductanceNetwork::vertices)
      .def_property_readonly("vertex_count",
                             &ConductanceNetwork::vertex_count)
      .def("edge", &ConductanceNetwork::edge, py::arg("u"), py::arg("v"))
      .def("loop", &ConductanceNetwork::loop, py::arg("v"))
      .def("total_conductance", &ConductanceNetwork::total_conductance)
      .def("neighbors", &ConductanceNetwork::neighbors,
           py::return_value_policy::copy)
      .def("is_tree", &ConductanceNetwork::is_tree)
      .def("is_connected", &ConductanceNetwork::is_connected)
      .def("validate", &ConductanceNetwork::validate);

  py::class_<VoltageSolution>(m, "VoltageSolution")
      .def_readonly("source", &VoltageSolution::source)
      .def_readonly("grounded", &VoltageSolution::grounded)
      .def_readonly("voltages", &VoltageSolution::voltages)
      .def_readonly("injected_current", &VoltageSolution::injected_current)
      .def_readonly("kcl_residual", &VoltageSolution::kcl_residual);

  m.def("line_conductances", &line_conductances, py::arg("chain"));
  m.def("solve_voltages", &solve_voltages, py::arg("net"), py::arg("source"),
        py::arg("grounded"));
  m.def("green_via_voltage", &green_via_voltage, py::arg("chain"),
        py::arg("x"), py::arg("y"));
  m.def("ratio_via_conductance", &ratio_via_conductance, py::arg("chain"),
        py::arg("x"), py::arg("y"));
  m.def("dump_network_json", &dump_network_json, py::arg("net"));
  m.def("network_from_json", &network_from_json, py::arg("text"));

  py::class_<TransitionRow>(m, "TransitionRow")
      .def(py::init([](double self, std::map<Vertex, double> to) {
             TransitionRow row;
             row.self = self;
             row.to = std::move(to);
             return row;
           }),
           py::arg("self_p") = 0.0,
           py::arg("to") = std::map<Vertex, double>{})
      .def_readonly("self_p", &TransitionRow::self)
      .def_readonly("to", &TransitionRow::to);

  py::class_<TreeChain>(m, "TreeChain")
      .def(py::init<std::vector<Vertex>,
                    std::vector<std::pair<Vertex, Vertex>>,
                    std::map<Vertex, TransitionRow>,
                    std::optional<std::set<Vertex>>>(),
           py::arg("vertices"), py::arg("edges"), py::arg("transitions"),
           py::arg("leaves") = std::nullopt)
      .def_static("prune", &TreeChain::prune, py::arg("host"),
                  py::arg("keep"))
      .def("vertices", &TreeChain::vertices,
           py::return_value_policy::copy)
      .def("neighbors", &TreeChain::neighbors,
           py::return_value_policy::copy)
      .def("degree", &TreeChain::degree)
      .def("has_vertex", &TreeChain::has_vertex)
      .def("is_leaf", &TreeChain::is_leaf)
      .def("is_interior", &TreeChain::is_interior)
      .def("leaves", &TreeChain::leaves, py::return_value_policy::copy)
      .def("interior", &TreeChain::interior)
      .def("row", &TreeChain::row, py::return_value_policy::copy)
      .def("p", &TreeChain::p, py::arg("v"), py::arg("w"))
      .def("validate", &TreeChain::validate)
      .def("require_valid", &TreeChain::require_valid);

  py::class_<TreePath>(m, "TreePath")
      .def_readonly("j", &TreePath::j)
      .def_readonly("k", &TreePath::k)
      .def_readonly("intermediate", &TreePath::intermediate)
      .def("edge_count", &TreePath::edge_count);

  m.def("find_path", &find_path, py::arg("tree"), py::arg("j"), py::arg("k"));
  m.def("assign_conductances", &assign_conductances, py::arg("tree"),
        py::arg("root"), py::arg("seed"));
  m.def("recover_probabilities", &recover_probabilities, py::arg("net"),
        py::arg("leaves") = std::nullopt);
  m.def("path_ratio", &path_ratio, py::arg("tree"), py::arg("j"),
        py::arg("k"));
  m.def("green_tree", &green_tree, py::arg("tree"), py::arg("x"),
        py::arg("y"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init([](std::uint64_t trials, std::uint64_t seed,
                       std::uint64_t max_steps, unsigned threads) {
             SimConfig cfg;
             cfg.trials = trials;
             cfg.seed = seed;
             cfg.max_steps = max_steps;
             cfg.threads = threads;
             return cfg;
           }),
           py::arg("trials") = 100000, py::arg("seed") = 0,
           py::arg("max_steps") = 1000000, py::arg("threads") = 1)
      .def_readwrite("trials", &SimConfig::trials)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("max_steps", &SimConfig::max_steps)
      .def_readwrite("threads", &SimConfig::threads);

  py::class_<VisitEstimate>(m, "VisitEstimate")
      .def_readonly("mean", &VisitEstimate::mean)
      .def_readonly("std_error", &VisitEstimate::std_error)
      .def_readonly("truncated_trials", &VisitEstimate::truncated_trials)
      .def_readonly("flagged", &VisitEstimate::flagged);

  m.def("simulate_line", &simulate_line, py::arg("chain"), py::arg("start"),
        py::arg("target"), py::arg("cfg") = SimConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("simulate_tree", &simulate_tree, py::arg("tree"), py::arg("start"),
        py::arg("target"), py::arg("cfg") = SimConfig{},
        py::call_guard<py::gil_scoped_release>());

  py::enum_<SeriesStatus>(m, "SeriesStatus")
      .value("Converged", SeriesStatus::Converged)
      .value("Diverged", SeriesStatus::Diverged)
      .value("Undetermined", SeriesStatus::Undetermined);

  py::class_<SideSum>(m, "SideSum")
      .def_readonly("sum", &SideSum::sum)
      .def_readonly("status", &SideSum::status)
      .def("infinite", &SideSum::infinite);

  py::enum_<Recurrence>(m, "Recurrence")
      .value("Recurrent", Recurrence::Recurrent)
      .value("Transient", Recurrence::Transient)
      .value("Inconclusive", Recurrence::Inconclusive);

  py::class_<RecurrenceVerdict>(m, "RecurrenceVerdict")
      .def_readonly("kind", &RecurrenceVerdict::kind)
      .def_readonly("left_sum", &RecurrenceVerdict::left_sum)
      .def_readonly("right_sum", &RecurrenceVerdict::right_sum);

  py::class_<ClassifyOptions>(m, "ClassifyOptions")
      .def(py::init([](std::int64_t horizon, double divergence_threshold,
                       double convergence_tolerance) {
             ClassifyOptions opt;
             opt.horizon = horizon;
             opt.divergence_threshold = divergence_threshold;
             opt.convergence_tolerance = convergence_tolerance;
             return opt;
           }),
           py::arg("horizon") = 10000,
           py::arg("divergence_threshold") = 1e12,
           py::arg("convergence_tolerance") = 1e-3)
      .def_readwrite("horizon", &ClassifyOptions::horizon)
      .def_readwrite("divergence_threshold",
                     &ClassifyOptions::divergence_threshold)
      .def_readwrite("convergence_tolerance",
                     &ClassifyOptions::convergence_tolerance);

  m.def(
      "classify",
      [](const py::function& coefficients, const ClassifyOptions& options) {
        return classify(wrap_coefficients(coefficients), options);
      },
      py::arg("coefficients"), py::arg("options") = ClassifyOptions{});

  py::enum_<FormulaSpec::Family>(m, "FormulaFamily")
      .value("Uniform", FormulaSpec::Family::Uniform)
      .value("InverseDrift", FormulaSpec::Family::InverseDrift);

  py::class_<FormulaSpec>(m, "FormulaSpec")
      .def_readonly("family", &FormulaSpec::family)
      .def_readonly("l", &FormulaSpec::l)
      .def_readonly("a", &FormulaSpec::a)
      .def_readonly("r", &FormulaSpec::r)
      .def_readonly("base", &FormulaSpec::base)
      .def_readonly("amplitude", &FormulaSpec::amplitude)
      .def_readonly("floor", &FormulaSpec::floor)
      .def("coefficients", &FormulaSpec::coefficients);

  m.def(
      "classify_formula",
      [](const FormulaSpec& spec, const ClassifyOptions& options) {
        return classify(spec.coefficients(), options);
      },
      py::arg("spec"), py::arg("options") = ClassifyOptions{},
      py::call_guard<py::gil_scoped_release>());

  m.def("chain_from_json", &chain_from_json, py::arg("text"));
  m.def("tree_from_json", &tree_from_json, py::arg("text"));
  m.def("formula_from_json", &formula_from_json, py::arg("text"));
  m.def("fnv1a64_hex",
        [](const std::string& s) { return fnv1a64_hex(s); },
        py::arg("data"));

  py::class_<SplitMix64>(m, "SplitMix64")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next", &SplitMix64::next)
      .def("next_double", &SplitMix64::next_double);
  m.def("mix64", &mix64, py::arg("z"));
  m.def("trial_stream", &trial_stream, py::arg("seed"), py::arg("trial"));
}
