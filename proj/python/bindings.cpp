#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adass/estimator.hpp"
#include "adass/fdata.hpp"
#include "adass/simgen.hpp"
#include "adass/tuning.hpp"

namespace py = pybind11;
using namespace adass;

namespace {

Interval interval_from(std::pair<double, double> p) { return {p.first, p.second}; }

std::vector<EstimatorKind> estimators_from(const std::vector<std::string>& names) {
    std::vector<EstimatorKind> kinds;
    for (const auto& n : names) kinds.push_back(estimator_by_name(n));
    return kinds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive smoothing spline estimation for function-on-function regression";

    py::register_exception<Error>(m, "AdassError");

    py::class_<BasisSystem>(m, "BasisSystem")
        .def(py::init([](int order, int interior_knots, std::pair<double, double> domain) {
                 return BasisSystem(order, interior_knots, interval_from(domain));
             }),
             py::arg("order"), py::arg("interior_knots"),
             py::arg("domain") = std::pair<double, double>{0.0, 1.0})
        .def_property_readonly("order", &BasisSystem::order)
        .def_property_readonly("interior_knots", &BasisSystem::interior_knots)
        .def_property_readonly("dimension", &BasisSystem::dimension)
        .def_property_readonly("domain",
                               [](const BasisSystem& b) {
                                   return std::pair<double, double>{b.domain().lo, b.domain().hi};
                               })
        .def_property_readonly("knots", &BasisSystem::knots)
        .def("evaluate", &BasisSystem::evaluate, py::arg("x"), py::arg("deriv_order") = 0)
        .def("evaluate_points", &BasisSystem::evaluate_points, py::arg("xs"),
             py::arg("deriv_order") = 0);

    m.def(
        "product_integral",
        [](const BasisSystem& a, int da, const BasisSystem& b, int db,
           std::pair<double, double> iv) {
            return product_integral(a, da, b, db, interval_from(iv));
        },
        py::arg("basis_a"), py::arg("deriv_a"), py::arg("basis_b"), py::arg("deriv_b"),
        py::arg("interval"));

    py::class_<SubIntervalGrid>(m, "SubIntervalGrid")
        .def(py::init<std::vector<double>>(), py::arg("breakpoints"))
        .def_readonly("breakpoints", &SubIntervalGrid::breakpoints)
        .def_property_readonly("interval_count", &SubIntervalGrid::interval_count)
        .def_property_readonly("mesh_width", &SubIntervalGrid::mesh_width);

    py::class_<FunctionalSample>(m, "FunctionalSample")
        .def(py::init<Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("grid"), py::arg("values"))
        .def_readonly("grid", &FunctionalSample::grid)
        .def_readonly("values", &FunctionalSample::values)
        .def_property_readonly("domain",
                               [](const FunctionalSample& s) {
                                   return std::pair<double, double>{s.domain.lo, s.domain.hi};
                               })
        .def_property_readonly("size", &FunctionalSample::size);

    m.def("center", [](const FunctionalSample& s) {
        CenterResult r = center(s);
        return std::pair<FunctionalSample, Eigen::VectorXd>{std::move(r.sample),
                                                            std::move(r.mean)};
    });
    m.def("subtract_mean", &subtract_mean, py::arg("sample"), py::arg("mean"));
    m.def("project", &project, py::arg("sample"), py::arg("basis"));
    m.def("l2_norm_sq_sum", &l2_norm_sq_sum);
    m.def("trapezoid_weights", &trapezoid_weights);

    py::class_<DesignMatrices>(m, "DesignMatrices")
        .def(py::init([](Eigen::MatrixXd X, Eigen::MatrixXd Y, double y_norm_sq) {
                 return DesignMatrices{std::move(X), std::move(Y), y_norm_sq};
             }),
             py::arg("X"), py::arg("Y"), py::arg("y_norm_sq") = 0.0)
        .def_readonly("X", &DesignMatrices::X)
        .def_readonly("Y", &DesignMatrices::Y)
        .def_readonly("y_norm_sq", &DesignMatrices::y_norm_sq);
    m.def("make_design", &make_design, py::arg("X"), py::arg("Y"), py::arg("basis_s"),
          py::arg("basis_t"));

    m.def("load_csv", [](const std::string& path) {
        LabeledSample s = load_csv(path);
        return std::pair<FunctionalSample, std::vector<std::string>>{std::move(s.sample),
                                                                     std::move(s.curve_ids)};
    });
    m.def(
        "write_csv",
        [](const std::string& path, const FunctionalSample& sample,
           const std::vector<std::string>& ids) { write_csv(path, sample, ids); },
        py::arg("path"), py::arg("sample"), py::arg("curve_ids") = std::vector<std::string>{});

    py::class_<TuningPoint>(m, "TuningPoint")
        .def(py::init([](double ls, double dss, double gs, double lt, double dst, double gt) {
                 TuningPoint p;
                 p.lambda_s = ls;
                 p.delta_star_s = dss;
                 p.gamma_s = gs;
                 p.lambda_t = lt;
                 p.delta_star_t = dst;
                 p.gamma_t = gt;
                 return p;
             }),
             py::arg("lambda_s") = 1.0, py::arg("delta_star_s") = 0.0, py::arg("gamma_s") = 0.0,
             py::arg("lambda_t") = 1.0, py::arg("delta_star_t") = 0.0, py::arg("gamma_t") = 0.0)
        .def_readwrite("lambda_s", &TuningPoint::lambda_s)
        .def_readwrite("delta_star_s", &TuningPoint::delta_star_s)
        .def_readwrite("gamma_s", &TuningPoint::gamma_s)
        .def_readwrite("lambda_t", &TuningPoint::lambda_t)
        .def_readwrite("delta_star_t", &TuningPoint::delta_star_t)
        .def_readwrite("gamma_t", &TuningPoint::gamma_t)
        .def_readonly("cv_error", &TuningPoint::cv_error);

    py::class_<PenaltySystem>(m, "PenaltySystem")
        .def_static(
            "make",
            [](const BasisSystem& bs, const BasisSystem& bt, const SubIntervalGrid& gs,
               const SubIntervalGrid& gt, int ms, int mt) {
                return PenaltySystem::make(bs, bt, gs, gt, ms, mt);
            },
            py::arg("basis_s"), py::arg("basis_t"), py::arg("grid_s"), py::arg("grid_t"),
            py::arg("deriv_s") = 2, py::arg("deriv_t") = 2)
        .def_readonly("weight_s", &PenaltySystem::weight_s)
        .def_readonly("weight_t", &PenaltySystem::weight_t)
        .def("set_adaptive_weights", &PenaltySystem::set_adaptive_weights,
             py::arg("deriv_values_s"), py::arg("deriv_values_t"), py::arg("tuning"))
        .def("assemble", &PenaltySystem::assemble, py::arg("lambda_s"), py::arg("lambda_t"));

    py::class_<CoefficientSurface>(m, "CoefficientSurface")
        .def(py::init<BasisSystem, BasisSystem, Eigen::MatrixXd>(), py::arg("basis_s"),
             py::arg("basis_t"), py::arg("coefficients"))
        .def_readonly("B", &CoefficientSurface::B)
        .def_readonly("basis_s", &CoefficientSurface::basis_s)
        .def_readonly("basis_t", &CoefficientSurface::basis_t)
        .def("evaluate", &CoefficientSurface::evaluate, py::arg("s"), py::arg("t"),
             py::arg("deriv_s") = 0, py::arg("deriv_t") = 0)
        .def("evaluate_grid", &CoefficientSurface::evaluate_grid, py::arg("s_grid"),
             py::arg("t_grid"));
    m.def("save_surface", &save_surface);
    m.def("load_surface", &load_surface);

    m.def("fit_smooth", &fit_smooth, py::arg("design"), py::arg("basis_s"), py::arg("basis_t"),
          py::arg("lambda_s"), py::arg("lambda_t"), py::arg("deriv_s") = 2,
          py::arg("deriv_t") = 2, py::call_guard<py::gil_scoped_release>());
    m.def("fit_adass", &fit_adass, py::arg("design"), py::arg("penalty"), py::arg("tuning"),
          py::call_guard<py::gil_scoped_release>());
    m.def("initial_derivatives", &initial_derivatives, py::arg("surface"), py::arg("deriv_s"),
          py::arg("deriv_t"), py::arg("grid_s"), py::arg("grid_t"));
    m.def("predict", &predict, py::arg("surface"), py::arg("X_new"), py::arg("t_grid"));
    m.def("ise", &ise, py::arg("surface"), py::arg("beta_true"), py::arg("s_points") = 201,
          py::arg("t_points") = 201);
    m.def("pmse", &pmse, py::arg("surface"), py::arg("X_test"), py::arg("Y_test"));

    py::class_<CvPlan>(m, "CvPlan")
        .def_static("make", &CvPlan::make, py::arg("observation_count"), py::arg("folds"),
                    py::arg("seed"))
        .def_readonly("folds", &CvPlan::folds)
        .def_readonly("assignment", &CvPlan::assignment)
        .def_readonly("seed", &CvPlan::seed);

    py::class_<RegressionData>(m, "RegressionData")
        .def_static("make", &RegressionData::make, py::arg("X"), py::arg("Y"), py::arg("basis_s"),
                    py::arg("basis_t"))
        .def_readonly("X_proj", &RegressionData::X_proj)
        .def_readonly("Y_proj", &RegressionData::Y_proj);

    py::class_<EstimatorSettings>(m, "EstimatorSettings")
        .def(py::init<>())
        .def_readwrite("order_s", &EstimatorSettings::order_s)
        .def_readwrite("order_t", &EstimatorSettings::order_t)
        .def_readwrite("interior_s", &EstimatorSettings::interior_s)
        .def_readwrite("interior_t", &EstimatorSettings::interior_t)
        .def_readwrite("deriv_s", &EstimatorSettings::deriv_s)
        .def_readwrite("deriv_t", &EstimatorSettings::deriv_t)
        .def_readwrite("smooth_ladder", &EstimatorSettings::smooth_ladder)
        .def_readwrite("cv_folds", &EstimatorSettings::cv_folds)
        .def_readwrite("ise_points", &EstimatorSettings::ise_points)
        .def_property(
            "eaass_population",
            [](const EstimatorSettings& s) { return s.eaass.population_size; },
            [](EstimatorSettings& s, int v) { s.eaass.population_size = v; })
        .def_property(
            "eaass_iterations",
            [](const EstimatorSettings& s) { return s.eaass.max_iterations; },
            [](EstimatorSettings& s, int v) { s.eaass.max_iterations = v; })
        .def_property(
            "eaass_seed", [](const EstimatorSettings& s) { return s.eaass.seed; },
            [](EstimatorSettings& s, std::uint64_t v) { s.eaass.seed = v; });

    m.def("default_breakpoint_grids", &default_breakpoint_grids, py::arg("basis_s"),
          py::arg("basis_t"));

    py::class_<SmoothFitResult>(m, "SmoothFitResult")
        .def_readonly("surface", &SmoothFitResult::surface)
        .def_readonly("lambda_s", &SmoothFitResult::lambda_s)
        .def_readonly("lambda_t", &SmoothFitResult::lambda_t)
        .def_readonly("cv_error", &SmoothFitResult::cv_error);
    m.def("fit_smooth_cv", &fit_smooth_cv, py::arg("data"), py::arg("settings"), py::arg("plan"),
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

    py::class_<AdassFitResult>(m, "AdassFitResult")
        .def_readonly("surface", &AdassFitResult::surface)
        .def_readonly("tuning", &AdassFitResult::tuning)
        .def_readonly("best_history", &AdassFitResult::best_history)
        .def_readonly("initial_lambda_s", &AdassFitResult::initial_lambda_s)
        .def_readonly("initial_lambda_t", &AdassFitResult::initial_lambda_t);
    m.def(
        "fit_adass_auto",
        [](const RegressionData& data, const EstimatorSettings& settings, const CvPlan& plan,
           int threads) {
            py::gil_scoped_release release;
            return fit_adass_auto(data, settings, plan, threads);
        },
        py::arg("data"), py::arg("settings"), py::arg("plan"), py::arg("threads") = 1);

    py::class_<Scenario>(m, "Scenario")
        .def_static("by_name", &Scenario::by_name, py::arg("name"))
        .def_static("names", &Scenario::names)
        .def_readonly("name", &Scenario::name)
        .def("beta", [](const Scenario& s, double x, double t) { return s.beta(x, t); });

    py::class_<GenConfig>(m, "GenConfig")
        .def(py::init<>())
        .def_readwrite("n", &GenConfig::n)
        .def_readwrite("test_n", &GenConfig::test_n)
        .def_readwrite("s_points", &GenConfig::s_points)
        .def_readwrite("t_points", &GenConfig::t_points)
        .def_readwrite("sn_target", &GenConfig::sn_target)
        .def_readwrite("x_basis_count", &GenConfig::x_basis_count)
        .def_readwrite("e_basis_count", &GenConfig::e_basis_count)
        .def_readwrite("seed", &GenConfig::seed);

    m.def("gen_covariates", &gen_covariates, py::arg("config"));
    m.def(
        "gen_response",
        [](const FunctionalSample& X, const Scenario& scenario, const GenConfig& cfg) {
            ResponseResult r = gen_response(X, scenario, cfg);
            return std::pair<FunctionalSample, double>{std::move(r.Y), r.noise_scale};
        },
        py::arg("X"), py::arg("scenario"), py::arg("config"));
    m.def("synth_response", &synth_response, py::arg("X"), py::arg("scenario"), py::arg("config"),
          py::arg("noise_scale"));
    m.def("estimate_sn", &estimate_sn, py::arg("X"), py::arg("scenario"), py::arg("config"),
          py::arg("noise_scale"), py::arg("draw_count"), py::arg("seed"));

    py::class_<McRow>(m, "McRow")
        .def_readonly("scenario", &McRow::scenario)
        .def_readonly("estimator", &McRow::estimator)
        .def_readonly("n", &McRow::n)
        .def_readonly("replication", &McRow::replication)
        .def_readonly("seed", &McRow::seed)
        .def_readonly("ise", &McRow::ise)
        .def_readonly("pmse", &McRow::pmse)
        .def_readonly("ok", &McRow::ok)
        .def_readonly("message", &McRow::message);
    py::class_<McAggregate>(m, "McAggregate")
        .def_readonly("scenario", &McAggregate::scenario)
        .def_readonly("estimator", &McAggregate::estimator)
        .def_readonly("n", &McAggregate::n)
        .def_readonly("completed", &McAggregate::completed)
        .def_readonly("mean_ise", &McAggregate::mean_ise)
        .def_readonly("se_ise", &McAggregate::se_ise)
        .def_readonly("mean_pmse", &McAggregate::mean_pmse)
        .def_readonly("se_pmse", &McAggregate::se_pmse);

    m.def(
        "run_monte_carlo",
        [](const std::string& scenario, const GenConfig& cfg, const EstimatorSettings& settings,
           int replications, const std::vector<std::string>& estimators, int threads) {
            const Scenario sc = Scenario::by_name(scenario);
            const auto kinds = estimators_from(estimators);
            py::gil_scoped_release release;
            McResult r = run_monte_carlo(sc, cfg, settings, replications, kinds, threads);
            return std::pair<std::vector<McRow>, std::vector<McAggregate>>{
                std::move(r.rows), std::move(r.aggregates)};
        },
        py::arg("scenario"), py::arg("config"), py::arg("settings"), py::arg("replications"),
        py::arg("estimators") = std::vector<std::string>{"SMOOTH", "AdaSS"},
        py::arg("threads") = 1);

    m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("stream"), py::arg("index") = 0);
}
