#include "swcbc/cli.hpp"
#include "swcbc/errors.hpp"
#include "swcbc/fem.hpp"
#include "swcbc/schemes.hpp"
#include "swcbc/studies.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

namespace py = pybind11;
using namespace swcbc;

namespace {

studies::Reconstruction parse_reconstruction(const std::string& s)
{
    if (s == "pointwise") {
        return studies::Reconstruction::Pointwise;
    }
    if (s == "nodal") {
        return studies::Reconstruction::Nodal;
    }
    if (s == "invariants") {
        return studies::Reconstruction::Invariants;
    }
    throw ValidationError("reconstruction", "expected pointwise, nodal or invariants, got '" + s + "'");
}

py::object optional_float(const std::optional<double>& v)
{
    return v ? py::cast(*v) : py::none();
}

} // namespace

PYBIND11_MODULE(_swcbc, m)
{
    m.doc() = "Galerkin shallow-water solver with characteristic boundary conditions";
    m.attr("__version__") = std::string(cli::kVersion);

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    static py::exception<ValidationError> validation(m, "ValidationError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const ValidationError& e) {
            auto exc = py::reinterpret_borrow<py::object>(validation.ptr())(e.what());
            exc.attr("key") = e.key();
            exc.attr("kind") = e.kind();
            PyErr_SetObject(validation.ptr(), exc.ptr());
        } catch (const Error& e) {
            auto exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            exc.attr("kind") = e.kind();
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def("case_names", &cli::case_names, "Manufactured cases accepted by `case`.");

    m.def(
        "gauss_rule",
        [](int n) {
            const auto r = fem::gauss_rule(n);
            return py::make_tuple(r.points, r.weights, r.order);
        },
        py::arg("n"), "Gauss-Legendre (points, weights, exact degree) on [-1, 1].");

    m.def(
        "riemann_forward",
        [](double eta, double u, double eta0, double u0) {
            const auto r = schemes::riemann_forward(eta, u, schemes::PhysicalParams::nondimensional(eta0, u0));
            return py::make_tuple(r.v, r.w);
        },
        py::arg("eta"), py::arg("u"), py::arg("eta0") = 1.0, py::arg("u0") = 1.0);

    m.def(
        "riemann_inverse",
        [](double v, double w, double eta0, double u0) {
            const auto r = schemes::riemann_inverse(v, w, schemes::PhysicalParams::nondimensional(eta0, u0));
            return py::make_tuple(r.eta, r.u);
        },
        py::arg("v"), py::arg("w"), py::arg("eta0") = 1.0, py::arg("u0") = 1.0);

    m.def(
        "convergence",
        [](const std::string& name, const std::vector<int>& Ns, double k_div, double T,
           const std::string& reconstruction, int jobs) {
            studies::StudyOptions o;
            o.reconstruction = parse_reconstruction(reconstruction);
            o.jobs = jobs;
            const auto c = cli::load_case(name);
            studies::ConvergenceTable t;
            {
                py::gil_scoped_release release;
                t = studies::run_convergence(c, Ns, k_div, T, o);
            }
            py::list rows;
            for (const auto& r : t.rows) {
                py::dict d;
                d["N"] = r.N;
                d["error_first"] = r.error_first;
                d["order_first"] = optional_float(r.order_first);
                d["error_second"] = r.error_second;
                d["order_second"] = optional_float(r.order_second);
                rows.append(d);
            }
            return rows;
        },
        py::arg("case"), py::arg("Ns"), py::arg("k_div") = 10.0, py::arg("T") = 1.0,
        py::arg("reconstruction") = "pointwise", py::arg("jobs") = 1,
        "Spatial convergence table of a manufactured case: one dict per mesh.");

    m.def(
        "temporal_order",
        [](const std::string& name, int N, const std::vector<double>& k_divs, double k_ref_div, double T,
           int jobs) {
            studies::StudyOptions o;
            o.jobs = jobs;
            const auto c = cli::load_case(name);
            studies::TemporalTable t;
            {
                py::gil_scoped_release release;
                t = studies::run_temporal_order(c, N, k_divs, k_ref_div, T, o);
            }
            py::list rows;
            for (const auto& r : t.rows) {
                py::dict d;
                d["k_div"] = r.k_div;
                d["k"] = r.k;
                d["e_star"] = r.e_star;
                d["order"] = optional_float(r.order);
                d["e_exact"] = r.e_exact;
                rows.append(d);
            }
            py::dict out;
            out["h"] = t.h;
            out["k_ref"] = t.k_ref;
            out["rows"] = rows;
            return out;
        },
        py::arg("case"), py::arg("N"), py::arg("k_divs"), py::arg("k_ref_div") = 960.0, py::arg("T") = 1.0,
        py::arg("jobs") = 1);

    m.def(
        "normalize_config",
        [](const std::string& text, const std::vector<std::string>& overrides) {
            return cli::serialize(cli::parse_config(text, overrides));
        },
        py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
        "Parses and validates a run config, returning its canonical text with defaults filled in.");

    m.def(
        "run",
        [](const std::string& text, const std::vector<std::string>& overrides) {
            const auto cfg = cli::parse_config(text, overrides);
            cli::RunOutcome r;
            {
                py::gil_scoped_release release;
                r = cli::run(cfg);
            }
            std::vector<std::string> files;
            for (const auto& f : r.files) {
                files.push_back(f.string());
            }
            py::dict d;
            d["completed"] = r.completed;
            d["status"] = r.status;
            d["files"] = files;
            return d;
        },
        py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
        "Runs a config exactly as the swcbc executable would and lists the files written.");
}
