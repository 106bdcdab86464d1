#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phasered/adjoint.hpp"
#include "phasered/cli.hpp"
#include "phasered/models.hpp"
#include "phasered/reduce.hpp"
#include "phasered/validate.hpp"

namespace py = pybind11;
using namespace phasered;

namespace {

PeriodicOrbit find_orbit_py(const VectorFieldSpec& field, const State& guess,
                            const IntegratorConfig& cfg, double closure_tol,
                            int n_samples) {
    OrbitOptions opts;
    opts.closure_tol = closure_tol;
    opts.n_samples = n_samples;
    return find_periodic_orbit(field, guess, cfg, opts);
}

}  // namespace

PYBIND11_MODULE(_phasered, m) {
    m.doc() = "Standard and augmented phase reduction (PRC, IRC, Floquet data) "
              "for planar limit-cycle oscillators";

    py::register_exception<SolverError>(m, "SolverError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<OracleUnavailable>(m, "OracleUnavailable");

    py::enum_<ModelId>(m, "ModelId")
        .value("LambdaOmega", ModelId::LambdaOmega)
        .value("HopfNF", ModelId::HopfNF)
        .value("BautinNF", ModelId::BautinNF)
        .value("Sniper", ModelId::Sniper)
        .value("HomoclinicSandstede", ModelId::HomoclinicSandstede)
        .value("VanDerPol", ModelId::VanDerPol);

    py::class_<VectorFieldSpec>(m, "VectorFieldSpec")
        .def_readonly("dimension", &VectorFieldSpec::dimension)
        .def_readonly("params", &VectorFieldSpec::params)
        .def("rhs", [](const VectorFieldSpec& f, const State& x) { return f.eval(x); })
        .def("jacobian",
             [](const VectorFieldSpec& f, const State& x) { return jacobian_at(f, x); })
        .def("divergence",
             [](const VectorFieldSpec& f, const State& x) { return divergence_at(f, x); });

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init<>())
        .def_readwrite("rel_tol", &IntegratorConfig::rel_tol)
        .def_readwrite("abs_tol", &IntegratorConfig::abs_tol)
        .def_readwrite("max_step", &IntegratorConfig::max_step)
        .def_readwrite("max_steps", &IntegratorConfig::max_steps)
        .def_readwrite("extended", &IntegratorConfig::extended);

    py::class_<PeriodicOrbit>(m, "PeriodicOrbit")
        .def_property_readonly("period", &PeriodicOrbit::period)
        .def_property_readonly("omega", &PeriodicOrbit::omega)
        .def_property_readonly("anchor", &PeriodicOrbit::anchor)
        .def_property_readonly("closure_residual", &PeriodicOrbit::closure_residual)
        .def("at_theta", &PeriodicOrbit::at_theta)
        .def("at_time", &PeriodicOrbit::at_time);

    py::class_<FloquetData>(m, "FloquetData")
        .def_readonly("k", &FloquetData::k)
        .def_readonly("lam", &FloquetData::lambda)
        .def_readonly("v", &FloquetData::v)
        .def_readonly("monodromy_underflow", &FloquetData::monodromy_underflow);

    py::enum_<IrcNormalization>(m, "IrcNormalization")
        .value("EigenvectorUnit", IrcNormalization::EigenvectorUnit)
        .value("MaxAbs", IrcNormalization::MaxAbs);

    py::class_<ResponseCurve>(m, "ResponseCurve")
        .def_readonly("grid_n", &ResponseCurve::grid_n)
        .def_readonly("thetas", &ResponseCurve::thetas)
        .def_readonly("values", &ResponseCurve::values)
        .def_readonly("omega", &ResponseCurve::omega)
        .def_readonly("k", &ResponseCurve::k)
        .def_readonly("closure_residual", &ResponseCurve::closure_residual)
        .def_readonly("curve_scale", &ResponseCurve::curve_scale)
        .def("at", &ResponseCurve::at);

    m.def("model_name", &model_name);
    m.def("model_default_params", &model_default_params);
    m.def("model_field",
          [](ModelId id, std::map<std::string, double> params) {
              return model_field(id, std::move(params));
          },
          py::arg("id"), py::arg("params") = std::map<std::string, double>{});
    m.def("model_default_integrator", &model_default_integrator);
    m.def("model_default_guess", &model_default_guess);
    m.def("homoclinic_analytic_k",
          [](double ls, double lu) {
              bool weak = false;
              const double k = homoclinic_analytic_k(ls, lu, &weak);
              return py::make_tuple(k, weak);
          },
          py::arg("lambda_s"), py::arg("lambda_u"),
          "returns (k, weakly_stable_flag)");
    m.def("box_transit_time", &box_transit_time);

    m.def("find_periodic_orbit", &find_orbit_py, py::arg("field"), py::arg("guess"),
          py::arg("cfg"), py::arg("closure_tol") = 1e-10, py::arg("n_samples") = 1000);
    m.def("floquet_divergence", &floquet_divergence);
    m.def("monodromy_poincare", &monodromy_poincare);
    m.def(
        "compute_prc",
        [](const VectorFieldSpec& field, const PeriodicOrbit& orbit,
           const IntegratorConfig& cfg, int grid_n) {
            PrcOptions opts;
            opts.grid_n = grid_n;
            return compute_prc(field, orbit, cfg, opts);
        },
        py::arg("field"), py::arg("orbit"), py::arg("cfg"), py::arg("grid_n") = 1000);
    m.def(
        "compute_irc",
        [](const VectorFieldSpec& field, const PeriodicOrbit& orbit, double k,
           const State& v, const IntegratorConfig& cfg, int grid_n,
           IrcNormalization normalization) {
            IrcOptions opts;
            opts.grid_n = grid_n;
            opts.normalization = normalization;
            return compute_irc(field, orbit, k, v, cfg, opts);
        },
        py::arg("field"), py::arg("orbit"), py::arg("k"), py::arg("v"), py::arg("cfg"),
        py::arg("grid_n") = 1000,
        py::arg("normalization") = IrcNormalization::EigenvectorUnit);
    m.def("phase_shift_oracle", &phase_shift_oracle);
    m.def("isostable_shift_oracle", &isostable_shift_oracle);

    py::class_<SpikeMuRecord>(m, "SpikeMuRecord")
        .def_readonly("mu", &SpikeMuRecord::mu)
        .def_readonly("period", &SpikeMuRecord::period)
        .def_readonly("k", &SpikeMuRecord::k)
        .def_readonly("a", &SpikeMuRecord::a)
        .def_readonly("b", &SpikeMuRecord::b)
        .def_readonly("spike_thetas", &SpikeMuRecord::spike_thetas)
        .def_readonly("mass_fraction", &SpikeMuRecord::mass_fraction);

    py::class_<SpikeReport>(m, "SpikeReport")
        .def_readonly("window", &SpikeReport::window)
        .def_readonly("records", &SpikeReport::records);

    m.def("relaxation_spike_analysis", &relaxation_spike_analysis, py::arg("mu_values"),
          py::arg("window") = 0.3, py::arg("grid_n") = 2000);

    py::class_<CatalogReport>(m, "CatalogReport")
        .def_readonly("shift", &CatalogReport::shift)
        .def_readonly("irc_sign", &CatalogReport::irc_sign)
        .def_readonly("prc_sup_rel_err", &CatalogReport::prc_sup_rel_err)
        .def_readonly("irc_sup_rel_err", &CatalogReport::irc_sup_rel_err)
        .def_readonly("k_numeric", &CatalogReport::k_numeric)
        .def_readonly("k_analytic", &CatalogReport::k_analytic)
        .def_readonly("k_rel_err", &CatalogReport::k_rel_err)
        .def_readonly("period", &CatalogReport::period);

    m.def(
        "catalog_crossvalidation",
        [](ModelId id, std::map<std::string, double> params, int grid_n) {
            return catalog_crossvalidation(id, std::move(params), {}, grid_n);
        },
        py::arg("id"), py::arg("params") = std::map<std::string, double>{},
        py::arg("grid_n") = 1000);

    m.def(
        "run_cli",
        [](const std::string& config_text) {
            RunConfig cfg = RunConfig::parse(config_text);
            std::string err;
            const int rc = run(std::move(cfg), &err);
            return py::make_tuple(rc, err);
        },
        "execute a run from config text; returns (exit_code, error_line)");
}
