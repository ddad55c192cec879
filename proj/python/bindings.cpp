#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ladderwalk/branching.hpp"
#include "ladderwalk/decomposer.hpp"
#include "ladderwalk/environment.hpp"
#include "ladderwalk/errors.hpp"
#include "ladderwalk/hitting.hpp"
#include "ladderwalk/io.hpp"
#include "ladderwalk/oracle.hpp"
#include "ladderwalk/rwre.hpp"
#include "ladderwalk/simulator.hpp"

namespace py = pybind11;
using namespace ladderwalk;

PYBIND11_MODULE(ladderwalk, m) {
    m.doc() = "Random walks with jumps in {-2,-1,1,2}: exit probabilities, branching structure, simulation";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    py::class_<SiteLaw>(m, "SiteLaw")
        .def(py::init(&SiteLaw::make), py::arg("q2"), py::arg("q1"), py::arg("p1"), py::arg("p2"))
        .def_readonly("q2", &SiteLaw::q2)
        .def_readonly("q1", &SiteLaw::q1)
        .def_readonly("p1", &SiteLaw::p1)
        .def_readonly("p2", &SiteLaw::p2)
        .def("prob", &SiteLaw::prob, py::arg("jump"))
        .def_property_readonly("drift", [](const SiteLaw& w) { return local_drift(w); })
        .def_property_readonly("jump_mass", [](const SiteLaw& w) { return jump_mass(w); })
        .def("__eq__", [](const SiteLaw& a, const SiteLaw& b) { return a == b; })
        .def("__repr__", [](const SiteLaw& w) {
            return "SiteLaw(" + format_number(w.q2) + ", " + format_number(w.q1) + ", " + format_number(w.p1) +
                   ", " + format_number(w.p2) + ")";
        });

    py::class_<EnvLaw>(m, "EnvLaw")
        .def_static("point_mass", &EnvLaw::point_mass, py::arg("law"))
        .def_static("dirichlet", &EnvLaw::dirichlet, py::arg("alpha"), py::arg("margin") = 1e-6)
        .def_static("mixture", &EnvLaw::mixture, py::arg("atoms"), py::arg("weights") = std::vector<double>{})
        .def("draw", &EnvLaw::draw, py::arg("key"));

    py::class_<Environment>(m, "Environment")
        .def_static("homogeneous", &Environment::homogeneous, py::arg("law"))
        .def_static("periodic", &Environment::periodic, py::arg("laws"))
        .def_static("explicit_range", &Environment::explicit_range, py::arg("lo"), py::arg("laws"),
                    py::arg("fallback"))
        .def_static("iid", &Environment::iid, py::arg("law"), py::arg("seed"))
        .def_static("from_json", [](const std::string& text) { return environment_from_json(nlohmann::json::parse(text)); },
                    py::arg("text"))
        .def("law_at", &Environment::law_at, py::arg("i"))
        .def("shifted", &Environment::shifted, py::arg("k"));

    py::enum_<ExitMethod>(m, "ExitMethod")
        .value("Recursive", ExitMethod::Recursive)
        .value("TransferMatrix", ExitMethod::TransferMatrix);

    py::class_<ExitProbTable>(m, "ExitProbTable")
        .def_readonly("a", &ExitProbTable::a)
        .def_readonly("b", &ExitProbTable::b)
        .def_readonly("to_b", &ExitProbTable::to_b)
        .def_readonly("to_b1", &ExitProbTable::to_b1)
        .def_readonly("monotone", &ExitProbTable::monotone)
        .def("at", &ExitProbTable::at, py::arg("k"), py::arg("target"))
        .def("lower", &ExitProbTable::lower, py::arg("k"));
    m.def("exit_probabilities", &exit_probabilities, py::arg("env"), py::arg("a"), py::arg("b"),
          py::arg("method") = ExitMethod::Recursive, py::arg("eps") = kDefaultEllipticity);

    py::class_<HitProfile>(m, "HitProfile")
        .def_readonly("f1", &HitProfile::f1)
        .def_readonly("f2", &HitProfile::f2)
        .def_readonly("depth", &HitProfile::depth)
        .def_readonly("converged", &HitProfile::converged);
    m.def("hit_from_below", &hit_from_below, py::arg("env"), py::arg("k"), py::arg("i"), py::arg("tol") = 1e-12,
          py::arg("max_depth") = kDefaultMaxDepth, py::arg("eps") = kDefaultEllipticity);
    m.def(
        "homogeneous_root", [](const SiteLaw& w) { return homogeneous_root(w).h; }, py::arg("law"));

    m.def("solve_exit", &solve_exit, py::arg("env"), py::arg("a"), py::arg("b"), py::arg("start"), py::arg("target"));
    m.def("solve_expected_exit_time", &solve_expected_exit_time, py::arg("env"), py::arg("a"), py::arg("b"),
          py::arg("start"));

    py::class_<ExcursionIndices>(m, "ExcursionIndices")
        .def_readonly("level", &ExcursionIndices::level)
        .def_readonly("alpha", &ExcursionIndices::alpha)
        .def_readonly("beta", &ExcursionIndices::beta)
        .def_readonly("gamma", &ExcursionIndices::gamma);
    py::class_<OffspringScalars>(m, "OffspringScalars")
        .def_readonly("x", &OffspringScalars::x)
        .def_readonly("y", &OffspringScalars::y)
        .def_readonly("z", &OffspringScalars::z)
        .def_readonly("w", &OffspringScalars::w)
        .def_readonly("s", &OffspringScalars::s)
        .def_readonly("t", &OffspringScalars::t)
        .def_readonly("v", &OffspringScalars::v);
    py::class_<BranchingModel>(m, "BranchingModel")
        .def(py::init([](const Environment& env) { return BranchingModel(env); }), py::arg("env"))
        .def("indices", &BranchingModel::indices, py::arg("level"), py::return_value_policy::copy)
        .def("scalars", &BranchingModel::scalars, py::arg("level"), py::return_value_policy::copy)
        .def("mean_matrix", [](BranchingModel& b, long long i) { return b.mean(i).q; }, py::arg("level"))
        .def("immigration", [](BranchingModel& b) { return b.immigration().pi; })
        .def("expected_tally", [](BranchingModel& b, long long i) { return expected_tally(b, i); }, py::arg("level"));

    py::class_<T1Result>(m, "T1Result")
        .def_readonly("value", &T1Result::value)
        .def_readonly("levels", &T1Result::levels)
        .def_readonly("converged", &T1Result::converged);
    m.def(
        "expected_t1",
        [](const Environment& env, double tol, long long max_levels) { return expected_t1(env, tol, max_levels); },
        py::arg("env"), py::arg("tol") = 1e-12, py::arg("max_levels") = kDefaultMaxLevels);

    py::class_<WalkPath>(m, "WalkPath")
        .def_readonly("positions", &WalkPath::positions)
        .def_readonly("stopped", &WalkPath::stopped)
        .def_readonly("t1", &WalkPath::t1)
        .def_readonly("x_t1", &WalkPath::x_t1);
    m.def("run_to_ladder", &run_to_ladder, py::arg("env"), py::arg("seed"), py::arg("step_cap") = kDefaultStepCap);

    py::class_<EnsembleStats>(m, "EnsembleStats")
        .def_readonly("replicas", &EnsembleStats::replicas)
        .def_readonly("stopped", &EnsembleStats::stopped)
        .def_readonly("abandoned", &EnsembleStats::abandoned)
        .def_readonly("mean_t1", &EnsembleStats::mean_t1)
        .def_readonly("se_t1", &EnsembleStats::se_t1)
        .def_readonly("mean_x", &EnsembleStats::mean_x)
        .def_readonly("x_hist", &EnsembleStats::x_hist)
        .def("__eq__", [](const EnsembleStats& a, const EnsembleStats& b) { return a == b; });
    m.def("run_ensemble", &run_ensemble, py::arg("env"), py::arg("seed"), py::arg("replicas"), py::arg("workers") = 1,
          py::arg("step_cap") = kDefaultStepCap, py::call_guard<py::gil_scoped_release>());

    py::class_<HorizonResult>(m, "HorizonResult")
        .def_readonly("n_steps", &HorizonResult::n_steps)
        .def_readonly("final_position", &HorizonResult::final_position)
        .def_readonly("empirical_drift", &HorizonResult::empirical_drift);
    m.def("run_horizon", &run_horizon, py::arg("env"), py::arg("seed"), py::arg("n_steps"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<Decomposition>(m, "Decomposition")
        .def_readonly("t1", &Decomposition::t1)
        .def_readonly("immigration", &Decomposition::immigration)
        .def("tally", &Decomposition::tally, py::arg("level"))
        .def_property_readonly("lowest_level", &Decomposition::lowest_level);
    m.def("decompose", &decompose, py::arg("path"));
    m.def(
        "verify_identity", [](const Decomposition& d, const WalkPath& p) { return verify_identity(d, p).ok; },
        py::arg("decomposition"), py::arg("path"));

    py::class_<VelocityReport>(m, "VelocityReport")
        .def_readonly("velocity_drift", &VelocityReport::velocity_drift)
        .def_readonly("velocity_abs", &VelocityReport::velocity_abs)
        .def_readonly("velocity_drift_se", &VelocityReport::velocity_drift_se)
        .def_readonly("velocity_abs_se", &VelocityReport::velocity_abs_se)
        .def_readonly("used", &VelocityReport::used)
        .def_readonly("divergent", &VelocityReport::divergent);
    m.def(
        "velocity",
        [](const EnvLaw& law, long long samples, double tol, std::uint64_t seed, int workers, long long max_levels) {
            return velocity(law, samples, tol, seed, workers, max_levels);
        },
        py::arg("env_law"), py::arg("samples"), py::arg("tol") = 1e-12, py::arg("seed") = 0, py::arg("workers") = 1,
        py::arg("max_levels") = kDefaultMaxLevels, py::call_guard<py::gil_scoped_release>());
}
