#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "localvar/adaptive.hpp"
#include "localvar/calibrate.hpp"
#include "localvar/crisis.hpp"
#include "localvar/fevd.hpp"
#include "localvar/io.hpp"
#include "localvar/pipeline.hpp"
#include "localvar/scenarios.hpp"

namespace py = pybind11;
using namespace localvar;

namespace {

TimeSeriesPanel make_panel(const Eigen::MatrixXd& values,
                           std::vector<std::string> names) {
    TimeSeriesPanel panel;
    panel.axis = TimeAxis::index();
    panel.values = values;
    if (names.empty()) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            names.push_back("y" + std::to_string(c));
        }
    }
    panel.names = std::move(names);
    panel.validate();
    return panel;
}

}  // namespace

PYBIND11_MODULE(_localvar, m) {
    m.doc() = "Adaptive local VAR toolkit";

    py::register_exception<Error>(m, "LocalVarError");

    py::class_<TimeSeriesPanel>(m, "Panel")
        .def(py::init(&make_panel), py::arg("values"),
             py::arg("names") = std::vector<std::string>{})
        .def_readonly("values", &TimeSeriesPanel::values)
        .def_readonly("names", &TimeSeriesPanel::names)
        .def("rows", &TimeSeriesPanel::rows)
        .def("dim", &TimeSeriesPanel::dim)
        .def("select", &TimeSeriesPanel::select);

    py::class_<VarParams>(m, "VarParams")
        .def(py::init([](Eigen::VectorXd intercept,
                         std::vector<Eigen::MatrixXd> lags,
                         Eigen::MatrixXd sigma) {
                 VarParams p{std::move(intercept), std::move(lags),
                             std::move(sigma)};
                 p.validate();
                 return p;
             }),
             py::arg("intercept"), py::arg("lags"), py::arg("sigma"))
        .def_readonly("intercept", &VarParams::intercept)
        .def_readonly("lags", &VarParams::lag_coeffs)
        .def_readonly("sigma", &VarParams::noise_cov)
        .def("dim", &VarParams::dim)
        .def("order", &VarParams::order);

    py::class_<IntervalGrid>(m, "IntervalGrid")
        .def(py::init<std::vector<Eigen::Index>>())
        .def_static("default_grid", &IntervalGrid::default_grid)
        .def_static("literature_grid", &IntervalGrid::literature_grid)
        .def("lengths", &IntervalGrid::lengths)
        .def("max_selectable", &IntervalGrid::max_selectable);

    py::class_<VarFit>(m, "VarFit")
        .def_readonly("params", &VarFit::params)
        .def_readonly("loglik", &VarFit::loglik)
        .def_readonly("residuals", &VarFit::residuals);

    m.def(
        "fit_var",
        [](const TimeSeriesPanel& panel, Eigen::Index end, Eigen::Index length,
           int p) { return fit_var(panel, Interval{end, length}, p); },
        py::arg("panel"), py::arg("end"), py::arg("length"), py::arg("p") = 1);
    m.def(
        "log_likelihood",
        [](const TimeSeriesPanel& panel, Eigen::Index end, Eigen::Index length,
           const VarParams& params) {
            return log_likelihood(panel, Interval{end, length}, params);
        },
        py::arg("panel"), py::arg("end"), py::arg("length"), py::arg("params"));
    m.def("is_stable", &is_stable);
    m.def("unconditional_mean", &unconditional_mean);
    m.def("simulate_var", &simulate_var, py::arg("params"), py::arg("n"),
          py::arg("burn_in") = 100, py::arg("seed") = 0,
          py::arg("allow_unstable") = false);

    py::class_<SpilloverTable>(m, "SpilloverTable")
        .def_readonly("raw", &SpilloverTable::raw)
        .def_readonly("normalized", &SpilloverTable::normalized)
        .def_readonly("total", &SpilloverTable::total)
        .def_readonly("horizon", &SpilloverTable::horizon);
    m.def("gfevd", &gfevd, py::arg("params"), py::arg("horizon") = 12,
          py::arg("sigma_as_sd") = false);

    py::class_<CriticalValues>(m, "CriticalValues")
        .def_readonly("zeta", &CriticalValues::zeta)
        .def_readonly("risk_bounds", &CriticalValues::risk_bounds)
        .def_readonly("fingerprint", &CriticalValues::fingerprint)
        .def_readonly("rho", &CriticalValues::rho);
    m.def(
        "calibrate",
        [](const VarParams& theta, const IntervalGrid& grid, double r,
           double rho, int n_samples, std::uint64_t seed, int workers) {
            CalibrationConfig cc;
            cc.theta_star = theta;
            cc.grid = grid;
            cc.r = r;
            cc.rho = rho;
            cc.n_samples = n_samples;
            cc.seed = seed;
            cc.workers = workers;
            return calibrate_critical_values(cc);
        },
        py::arg("theta"), py::arg("grid") = IntervalGrid::default_grid(),
        py::arg("r") = 0.5, py::arg("rho") = 0.5, py::arg("n_samples") = 10000,
        py::arg("seed") = 0, py::arg("workers") = 1);

    py::class_<AdaptiveResult>(m, "AdaptiveResult")
        .def_readonly("tau", &AdaptiveResult::tau)
        .def_readonly("k_hat", &AdaptiveResult::k_hat)
        .def_readonly("m_hat", &AdaptiveResult::m_hat)
        .def_readonly("theta_hat", &AdaptiveResult::theta_hat)
        .def_readonly("lr_trace", &AdaptiveResult::lr_trace)
        .def_readonly("stop_k", &AdaptiveResult::stop_k)
        .def_readonly("restricted", &AdaptiveResult::restricted);
    m.def("adaptive_search", &adaptive_search, py::arg("panel"),
          py::arg("tau"), py::arg("grid"), py::arg("critvals"),
          py::arg("r") = 0.5, py::arg("p") = 1);
    m.def("adaptive_series", &adaptive_series, py::arg("panel"),
          py::arg("grid"), py::arg("critvals"), py::arg("r") = 0.5,
          py::arg("p") = 1, py::arg("restrict_jumps") = true);
    m.def("first_admissible_tau", &first_admissible_tau);

    m.def("crisis_indicator", &crisis_indicator, py::arg("k_hat"),
          py::arg("k_max") = 6);

    m.def("ingest_csv", &ingest_csv, py::arg("path"),
          py::arg("columns") = std::vector<std::string>{});
    m.def("load_params", &load_params);
    m.def("save_params", &save_params);
}
