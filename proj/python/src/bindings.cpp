// Python bindings: model setup, propagation, loop phases and the run entry points.

#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "geophase/circle.hpp"
#include "geophase/config.hpp"
#include "geophase/emf.hpp"
#include "geophase/geometry.hpp"
#include "geophase/propagator.hpp"
#include "geophase/run.hpp"

namespace py = pybind11;
using namespace geophase;

namespace {

py::array_t<cplx> to_array(const Grid2D& g, const ComplexField& f) {
    py::array_t<cplx> a({g.n_x(), g.n_y()});
    std::copy(f.begin(), f.end(), a.mutable_data());
    return a;
}

void from_array(const Grid2D& g, py::array_t<cplx, py::array::c_style | py::array::forcecast> a,
                ComplexField& f) {
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != g.n_x() ||
        static_cast<std::size_t>(a.shape(1)) != g.n_y()) {
        throw std::invalid_argument("component shape does not match the grid");
    }
    f.assign(a.data(), a.data() + a.size());
}

Vec3 to_vec3(const std::array<double, 3>& v) { return {v[0], v[1], v[2]}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Geometric phase of a two-state nuclear wavepacket";
    m.attr("__version__") = library_version();

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalAbort>(m, "NumericalAbort", PyExc_RuntimeError);
    py::register_exception<PathError>(m, "PathError", PyExc_RuntimeError);

    py::enum_<Gauge>(m, "Gauge")
        .value("CORRELATED_MINUS", Gauge::CorrelatedMinus)
        .value("NORTHERN_PLUS", Gauge::NorthernPlus)
        .value("SOUTHERN_PLUS", Gauge::SouthernPlus);
    py::enum_<InitKind>(m, "InitKind")
        .value("CORRELATED", InitKind::Correlated)
        .value("UNCORRELATED", InitKind::Uncorrelated);
    py::enum_<Sampling>(m, "Sampling")
        .value("GRID_SNAPPED", Sampling::GridSnapped)
        .value("BILINEAR", Sampling::Bilinear);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("mass_amu", &ModelParams::mass_amu)
        .def_readwrite("omega_x", &ModelParams::omega_x)
        .def_readwrite("omega_y", &ModelParams::omega_y)
        .def_readwrite("kappa_x", &ModelParams::kappa_x)
        .def_readwrite("kappa_y", &ModelParams::kappa_y)
        .def_readwrite("gauge", &ModelParams::gauge)
        .def_readwrite("init_kind", &ModelParams::init_kind)
        .def_property_readonly("mass", &ModelParams::mass);

    py::class_<Grid2D>(m, "Grid2D")
        .def(py::init<std::size_t, std::size_t, double, double>(), py::arg("n_x"), py::arg("n_y"),
             py::arg("length_x"), py::arg("length_y"))
        .def_static("square", &Grid2D::square, py::arg("n"), py::arg("length"))
        .def_property_readonly("n_x", &Grid2D::n_x)
        .def_property_readonly("n_y", &Grid2D::n_y)
        .def_property_readonly("dx", &Grid2D::dx)
        .def_property_readonly("dy", &Grid2D::dy)
        .def_property_readonly("x", [](const Grid2D& g) {
            std::vector<double> v(g.n_x());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.x(i);
            return py::array_t<double>(v.size(), v.data());
        })
        .def_property_readonly("y", [](const Grid2D& g) {
            std::vector<double> v(g.n_y());
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = g.y(j);
            return py::array_t<double>(v.size(), v.data());
        });

    py::class_<SpinorField>(m, "SpinorField")
        .def(py::init<const Grid2D&>())
        .def_readonly("grid", &SpinorField::grid)
        .def_property(
            "psi1", [](const SpinorField& s) { return to_array(s.grid, s.psi1); },
            [](SpinorField& s, py::array_t<cplx> a) { from_array(s.grid, a, s.psi1); })
        .def_property(
            "psi2", [](const SpinorField& s) { return to_array(s.grid, s.psi2); },
            [](SpinorField& s, py::array_t<cplx> a) { from_array(s.grid, a, s.psi2); })
        .def("norm", [](const SpinorField& s) { return norm_squared(s); });

    m.def("initial_state", &initial_state, py::arg("params"), py::arg("grid"));
    m.def("initial_center", [](const ModelParams& p) {
        const Point2 c = initial_center(p);
        return std::make_pair(c.x, c.y);
    });

    py::class_<Observables>(m, "Observables")
        .def_readonly("norm", &Observables::norm)
        .def_readonly("energy", &Observables::energy)
        .def_readonly("kinetic", &Observables::kinetic)
        .def_readonly("potential", &Observables::potential);

    py::class_<SplitOperator>(m, "SplitOperator")
        .def(py::init<const ModelParams&, const Grid2D&, double>(), py::arg("params"),
             py::arg("grid"), py::arg("dt"))
        .def_property_readonly("dt", &SplitOperator::dt)
        .def("advance", &SplitOperator::advance, py::arg("state"), py::arg("n_steps"),
             py::call_guard<py::gil_scoped_release>())
        .def("observables", [](const SplitOperator& op, const SpinorField& s) {
            return observables(op.ops(), op.params(), s);
        });

    m.def("adiabatic_populations", [](const ModelParams& p, const SpinorField& s) {
        const auto a = adiabatic_populations(p, s);
        return std::make_pair(a.minus, a.plus);
    });

    m.def(
        "circle_phase",
        [](const SpinorField& s, double radius, std::size_t n_points, std::pair<double, double> c,
           double epsilon_th) {
            const SpectralOps ops(s.grid);
            const auto jets = circle_jets(spinor_spectrum(ops, s), {c.first, c.second}, radius,
                                          n_points, false);
            const auto r = circle_phase(jets, {}, epsilon_th);
            return std::make_pair(r.gamma, r.coverage);
        },
        py::arg("state"), py::arg("radius"), py::arg("n_points") = 1024,
        py::arg("center") = std::make_pair(0.0, 0.0), py::arg("epsilon_th") = default_epsilon_th,
        "s-formula phase on a circle from exact spinor values; returns (gamma, coverage)");

    m.def(
        "loop_phase_increments",
        [](const SpinorField& s, double radius, std::size_t n_points, double epsilon_th) {
            const SpectralOps ops(s.grid);
            const auto ds = sigma_and_density(s);
            const auto mom =
                complex_momentum(s, ds, spinor_derivatives(ops, s, false), ModelParams{}.mass(),
                                 epsilon_th);
            const auto path = make_circle(s.grid, radius, n_points, Sampling::Bilinear);
            const auto r = path_phase_from_increments(s, mom.valid, path);
            return std::make_pair(r.gamma, r.coverage);
        },
        py::arg("state"), py::arg("radius"), py::arg("n_points") = 512,
        py::arg("epsilon_th") = default_epsilon_th,
        "momentum-circulation phase on a centred circle; returns (gamma, coverage)");

    m.def(
        "bloch_loop_phase",
        [](const std::vector<std::array<double, 3>>& image) {
            std::vector<Vec3> s;
            s.reserve(image.size());
            for (const auto& v : image) s.push_back(to_vec3(v));
            return bloch_loop_phase(s).gamma;
        },
        py::arg("image"), "s-formula on a closed sequence of unit vectors");
    m.def("constant_latitude_phase", &constant_latitude_phase, py::arg("theta"));
    m.def("wrap_pi", &wrap_pi);

    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("model", &RunConfig::model)
        .def_readwrite("n_x", &RunConfig::n_x)
        .def_readwrite("n_y", &RunConfig::n_y)
        .def_readwrite("dt", &RunConfig::dt)
        .def_readwrite("t_final_fs", &RunConfig::t_final_fs)
        .def_readwrite("radii", &RunConfig::radii)
        .def_readwrite("emf_radii", &RunConfig::emf_radii)
        .def_readwrite("epsilon_th", &RunConfig::epsilon_th)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def("grid", &RunConfig::grid)
        .def("validate", &RunConfig::validate)
        .def("canonical", &RunConfig::canonical)
        .def("hash", &RunConfig::hash);
    m.def("parse_config", [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    });
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "run",
        [](const RunConfig& c, bool resume) {
            RunOptions o;
            o.resume = resume;
            py::gil_scoped_release release;
            const auto s = run_simulation(c, o);
            return py::make_tuple(s.directory, s.steps, s.final_time_au, s.max_plus_population);
        },
        py::arg("config"), py::arg("resume") = false,
        "runs a simulation; returns (directory, steps, final_time_au, max_upper_population)");
    m.def(
        "diagnose_precision",
        [](const RunConfig& c, const std::filesystem::path& csv) {
            const auto r = diagnose_precision(c, csv);
            return py::make_tuple(r.spearman, r.report.samples.size(), r.report.excluded);
        },
        py::arg("config"), py::arg("csv"),
        "FFT round trip on the initial state; returns (spearman, samples, excluded)");
}
