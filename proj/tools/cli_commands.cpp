#include "cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "adass/estimator.hpp"

namespace adass::cli {

namespace {

void require_file(const std::string& path, const char* what) {
    if (path.empty())
        throw Error("invalid-config", std::string("missing required input: ") + what);
    if (!std::filesystem::exists(path))
        throw Error("input-not-found", "no such file '" + path + "'");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("output-failed", "cannot write '" + path + "'");
    return out;
}

void note(const std::string& path) { std::cout << "wrote " << path << '\n'; }

void write_sample(const std::string& path, const FunctionalSample& sample,
                  const std::vector<std::string>& ids = {}) {
    write_csv(path, sample, ids);
    note(path);
}

double interpolate(const Eigen::VectorXd& grid, const Eigen::VectorXd& values, double x) {
    if (x <= grid[0]) return values[0];
    if (x >= grid[grid.size() - 1]) return values[values.size() - 1];
    Eigen::Index hi = 1;
    while (grid[hi] < x) ++hi;
    const double w = (x - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
    return (1.0 - w) * values[hi - 1] + w * values[hi];
}

struct TuneOutcome {
    std::string method;
    std::optional<CoefficientSurface> surface;
    json info;
    std::vector<std::string> history_header;
    std::vector<std::vector<double>> history_rows;
};

bool has_number(const json& cfg, const char* key) {
    return cfg.contains(key) && cfg.at(key).is_number();
}

/// Shared search-and-fit pipeline behind `fit` and `tune`.
TuneOutcome tune_and_fit(const json& cfg) {
    require_file(cfg.at("x").get<std::string>(), "--x");
    require_file(cfg.at("y").get<std::string>(), "--y");
    const LabeledSample lx = load_csv(cfg.at("x").get<std::string>());
    const LabeledSample ly = load_csv(cfg.at("y").get<std::string>());

    EstimatorSettings settings = settings_from(cfg);
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    const int threads = resolve_threads(cfg);
    const auto [basis_s, basis_t] =
        make_bases(settings, lx.sample.domain, ly.sample.domain);
    const RegressionData data = RegressionData::make(lx.sample, ly.sample, basis_s, basis_t);
    const CvPlan plan = CvPlan::make(static_cast<int>(data.size()), settings.cv_folds,
                                     derive_seed(seed, "folds"));
    const CenteredDesign full = center_full(data);

    TuneOutcome outcome;
    outcome.method = cfg.at("method").get<std::string>();

    if (outcome.method == "smooth") {
        outcome.history_header = {"lambda_s", "lambda_t", "cv_error"};
        double ls, lt, cv;
        if (has_number(cfg, "lambda_s") && has_number(cfg, "lambda_t")) {
            ls = cfg.at("lambda_s").get<double>();
            lt = cfg.at("lambda_t").get<double>();
            const FitProcedure fixed = [&](const DesignMatrices& d) {
                return fit_smooth(d, basis_s, basis_t, ls, lt, settings.deriv_s,
                                  settings.deriv_t);
            };
            cv = cv_error(fixed, data, plan);
            outcome.history_rows.push_back({ls, lt, cv});
        } else {
            const auto family = [&](const std::vector<double>& p) -> FitProcedure {
                const double as = p[0], at = p[1];
                return [&, as, at](const DesignMatrices& d) {
                    return fit_smooth(d, basis_s, basis_t, as, at, settings.deriv_s,
                                      settings.deriv_t);
                };
            };
            const GridSearchResult sel = grid_search(
                family, data, {settings.smooth_ladder, settings.smooth_ladder}, plan, threads);
            ls = sel.parameters[0];
            lt = sel.parameters[1];
            cv = sel.cv_error;
            std::size_t combo = 0;
            for (double a : settings.smooth_ladder)
                for (double b : settings.smooth_ladder)
                    outcome.history_rows.push_back({a, b, sel.all_errors[combo++]});
        }
        outcome.surface =
            fit_smooth(full.design, basis_s, basis_t, ls, lt, settings.deriv_s, settings.deriv_t);
        outcome.info = {{"method", "smooth"},
                        {"lambda_s", ls},
                        {"lambda_t", lt},
                        {"cv_error", cv}};
        return outcome;
    }
    if (outcome.method != "adass")
        throw Error("invalid-config", "method must be 'smooth' or 'adass'");

    outcome.history_header = {"iteration",    "member",  "lambda_s", "delta_star_s", "gamma_s",
                              "lambda_t",     "delta_star_t", "gamma_t", "cv_error"};
    const bool fully_specified =
        has_number(cfg, "lambda_s") && has_number(cfg, "lambda_t") &&
        has_number(cfg, "gamma_s") && has_number(cfg, "gamma_t") &&
        has_number(cfg, "delta_star_s") && has_number(cfg, "delta_star_t");

    if (fully_specified) {
        TuningPoint tp;
        tp.lambda_s = cfg.at("lambda_s").get<double>();
        tp.lambda_t = cfg.at("lambda_t").get<double>();
        tp.gamma_s = cfg.at("gamma_s").get<double>();
        tp.gamma_t = cfg.at("gamma_t").get<double>();
        tp.delta_star_s = cfg.at("delta_star_s").get<double>();
        tp.delta_star_t = cfg.at("delta_star_t").get<double>();

        const auto [grid_s, grid_t] = default_breakpoint_grids(basis_s, basis_t);
        PenaltySystem penalty =
            PenaltySystem::make(basis_s, basis_t, grid_s, grid_t, settings.deriv_s,
                                settings.deriv_t);
        Eigen::MatrixXd d_s = Eigen::MatrixXd::Zero(grid_s.interval_count(),
                                                    grid_t.interval_count());
        Eigen::MatrixXd d_t = d_s;
        double init_ls = 0.0, init_lt = 0.0;
        if (tp.gamma_s != 0.0 || tp.gamma_t != 0.0) {
            const SmoothFitResult initial = fit_smooth_cv(data, settings, plan, threads);
            init_ls = initial.lambda_s;
            init_lt = initial.lambda_t;
            std::tie(d_s, d_t) = initial_derivatives(initial.surface, settings.deriv_s,
                                                     settings.deriv_t, grid_s, grid_t);
        }
        penalty.set_adaptive_weights(d_s, d_t, tp);
        const FitProcedure fixed = [&](const DesignMatrices& d) {
            return fit_adass(d, penalty, tp);
        };
        const double cv = cv_error(fixed, data, plan);
        outcome.surface = fit_adass(full.design, penalty, tp);
        outcome.history_rows.push_back({0.0, 0.0, tp.lambda_s, tp.delta_star_s, tp.gamma_s,
                                        tp.lambda_t, tp.delta_star_t, tp.gamma_t, cv});
        outcome.info = {{"method", "adass"},
                        {"lambda_s", tp.lambda_s},
                        {"lambda_t", tp.lambda_t},
                        {"gamma_s", tp.gamma_s},
                        {"gamma_t", tp.gamma_t},
                        {"delta_star_s", tp.delta_star_s},
                        {"delta_star_t", tp.delta_star_t},
                        {"cv_error", cv},
                        {"initial_lambda_s", init_ls},
                        {"initial_lambda_t", init_lt}};
        return outcome;
    }

    // Partially specified parameters pin their search range.
    settings.eaass.seed = derive_seed(seed, "eaass");
    const auto pin = [&](const char* key, Interval& range) {
        if (has_number(cfg, key)) {
            const double v = cfg.at(key).get<double>();
            range = {v, v};
        }
    };
    pin("lambda_s", settings.eaass.ranges.lambda_s);
    pin("lambda_t", settings.eaass.ranges.lambda_t);
    pin("gamma_s", settings.eaass.ranges.gamma_s);
    pin("gamma_t", settings.eaass.ranges.gamma_t);
    pin("delta_star_s", settings.eaass.ranges.delta_star_s);
    pin("delta_star_t", settings.eaass.ranges.delta_star_t);

    const AdassFitResult fit = fit_adass_auto(data, settings, plan, threads);
    for (const EaassRecord& rec : fit.evaluations)
        outcome.history_rows.push_back({static_cast<double>(rec.iteration),
                                        static_cast<double>(rec.member), rec.point.lambda_s,
                                        rec.point.delta_star_s, rec.point.gamma_s,
                                        rec.point.lambda_t, rec.point.delta_star_t,
                                        rec.point.gamma_t, rec.point.cv_error});
    outcome.surface = fit.surface;
    outcome.info = {{"method", "adass"},
                    {"lambda_s", fit.tuning.lambda_s},
                    {"lambda_t", fit.tuning.lambda_t},
                    {"gamma_s", fit.tuning.gamma_s},
                    {"gamma_t", fit.tuning.gamma_t},
                    {"delta_star_s", fit.tuning.delta_star_s},
                    {"delta_star_t", fit.tuning.delta_star_t},
                    {"cv_error", fit.tuning.cv_error},
                    {"initial_lambda_s", fit.initial_lambda_s},
                    {"initial_lambda_t", fit.initial_lambda_t}};
    return outcome;
}

void write_history(const std::string& path, const TuneOutcome& outcome) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < outcome.history_header.size(); ++i)
        out << (i ? "," : "") << outcome.history_header[i];
    out << '\n';
    for (const auto& row : outcome.history_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (outcome.history_header[i] == "iteration" ||
                outcome.history_header[i] == "member")
                out << static_cast<long long>(row[i]);
            else
                out << format_number(row[i]);
        }
        out << '\n';
    }
    note(path);
}

void write_tuning_json(const std::string& path, const json& info) {
    auto out = open_out(path);
    out << info.dump(2) << '\n';
    note(path);
}

}  // namespace

void run_simulate(const json& cfg) {
    const Scenario scenario = Scenario::by_name(cfg.at("scenario").get<std::string>());
    const GenConfig base = gen_config_from(cfg);
    const std::string dir = prepare_out_dir(cfg);

    GenConfig train_cfg = base;
    train_cfg.seed = derive_seed(base.seed, "train");
    const FunctionalSample train_x = gen_covariates(train_cfg);
    const ResponseResult train = gen_response(train_x, scenario, train_cfg);

    GenConfig test_cfg = base;
    test_cfg.n = base.test_n;
    test_cfg.seed = derive_seed(base.seed, "test");
    const FunctionalSample test_x = gen_covariates(test_cfg);
    const FunctionalSample test_y =
        synth_response(test_x, scenario, test_cfg, train.noise_scale);

    write_sample(dir + "/train_x.csv", train_x);
    write_sample(dir + "/train_y.csv", train.Y);
    write_sample(dir + "/test_x.csv", test_x);
    write_sample(dir + "/test_y.csv", test_y);

    const std::string beta_path = dir + "/beta_true.csv";
    auto out = open_out(beta_path);
    out << "s,t,value\n";
    const Eigen::VectorXd s_grid = Eigen::VectorXd::LinSpaced(base.s_points, 0.0, 1.0);
    const Eigen::VectorXd t_grid = Eigen::VectorXd::LinSpaced(base.t_points, 0.0, 1.0);
    for (Eigen::Index i = 0; i < s_grid.size(); ++i)
        for (Eigen::Index j = 0; j < t_grid.size(); ++j)
            out << format_number(s_grid[i]) << ',' << format_number(t_grid[j]) << ','
                << format_number(scenario.beta(s_grid[i], t_grid[j])) << '\n';
    out.close();
    note(beta_path);

    write_manifest(cfg, "simulate", dir);
    note(dir + "/manifest.json");
}

void run_fit(const json& cfg) {
    const std::string dir = prepare_out_dir(cfg);
    const TuneOutcome outcome = tune_and_fit(cfg);
    const CoefficientSurface& surface = *outcome.surface;

    save_surface(surface, dir + "/surface.json");
    note(dir + "/surface.json");
    write_tuning_json(dir + "/tuning.json", outcome.info);

    // Slice export for plotting: a few response-side cuts of the surface.
    const int slices = cfg.at("slice_count").get<int>();
    const int s_points = cfg.at("ise_points").get<int>();
    const Interval ds = surface.basis_s.domain(), dt = surface.basis_t.domain();
    const Eigen::VectorXd t_cuts = Eigen::VectorXd::LinSpaced(std::max(slices, 2), dt.lo, dt.hi);
    const Eigen::VectorXd s_grid = Eigen::VectorXd::LinSpaced(s_points, ds.lo, ds.hi);
    const Eigen::MatrixXd values = surface.evaluate_grid(s_grid, t_cuts);
    auto out = open_out(dir + "/slices.csv");
    out << "t,s,value\n";
    for (Eigen::Index j = 0; j < t_cuts.size(); ++j)
        for (Eigen::Index i = 0; i < s_grid.size(); ++i)
            out << format_number(t_cuts[j]) << ',' << format_number(s_grid[i]) << ','
                << format_number(values(i, j)) << '\n';
    out.close();
    note(dir + "/slices.csv");

    // Training mean curves, needed to center new data for prediction.
    const LabeledSample lx = load_csv(cfg.at("x").get<std::string>());
    const LabeledSample ly = load_csv(cfg.at("y").get<std::string>());
    write_sample(dir + "/mean_x.csv",
                 FunctionalSample(lx.sample.grid, center(lx.sample).mean.transpose(),
                                  lx.sample.domain),
                 {"mean"});
    write_sample(dir + "/mean_y.csv",
                 FunctionalSample(ly.sample.grid, center(ly.sample).mean.transpose(),
                                  ly.sample.domain),
                 {"mean"});

    write_manifest(cfg, "fit", dir);
    note(dir + "/manifest.json");
}

void run_tune(const json& cfg) {
    const std::string dir = prepare_out_dir(cfg);
    const TuneOutcome outcome = tune_and_fit(cfg);
    write_tuning_json(dir + "/tuning.json", outcome.info);
    write_history(dir + "/history.csv", outcome);
    write_manifest(cfg, "tune", dir);
    note(dir + "/manifest.json");
}

void run_predict(const json& cfg) {
    require_file(cfg.at("surface").get<std::string>(), "--surface");
    require_file(cfg.at("x").get<std::string>(), "--x");
    const CoefficientSurface surface = load_surface(cfg.at("surface").get<std::string>());
    const LabeledSample lx = load_csv(cfg.at("x").get<std::string>());
    const std::string dir = prepare_out_dir(cfg);

    FunctionalSample x = lx.sample;
    const std::string mean_x_path = cfg.value("mean_x", std::string{});
    if (!mean_x_path.empty()) {
        require_file(mean_x_path, "--mean-x");
        const LabeledSample mean_x = load_csv(mean_x_path);
        if (mean_x.sample.grid.size() != x.grid.size())
            throw Error("domain-mismatch", "mean_x grid does not match the predictor grid");
        x = subtract_mean(x, mean_x.sample.values.row(0));
    }

    const int t_points = cfg.at("t_points").get<int>();
    const Interval dt = surface.basis_t.domain();
    const Eigen::VectorXd t_grid = Eigen::VectorXd::LinSpaced(t_points, dt.lo, dt.hi);
    Eigen::MatrixXd pred = predict(surface, x, t_grid);

    const std::string mean_y_path = cfg.value("mean_y", std::string{});
    if (!mean_y_path.empty()) {
        require_file(mean_y_path, "--mean-y");
        const LabeledSample mean_y = load_csv(mean_y_path);
        for (Eigen::Index g = 0; g < t_grid.size(); ++g) {
            const double m = interpolate(mean_y.sample.grid,
                                         mean_y.sample.values.row(0).transpose(), t_grid[g]);
            pred.col(g).array() += m;
        }
    }

    write_sample(dir + "/predictions.csv", FunctionalSample(t_grid, pred, dt), lx.curve_ids);
    write_manifest(cfg, "predict", dir);
    note(dir + "/manifest.json");
}

void run_benchmark(const json& cfg) {
    const Scenario scenario = Scenario::by_name(cfg.at("scenario").get<std::string>());
    const GenConfig gen = gen_config_from(cfg);
    const EstimatorSettings settings = settings_from(cfg);
    const int replications = cfg.at("replications").get<int>();
    if (replications < 1)
        throw Error("invalid-config", "replications must be at least 1");
    std::vector<EstimatorKind> estimators;
    for (const auto& name : cfg.at("estimators"))
        estimators.push_back(estimator_by_name(name.get<std::string>()));

    const std::string dir = prepare_out_dir(cfg);
    const McResult result = run_monte_carlo(scenario, gen, settings, replications, estimators,
                                            resolve_threads(cfg));

    {
        auto out = open_out(dir + "/replications.csv");
        out << "scenario,estimator,n,replication,seed,ise,pmse\n";
        for (const McRow& row : result.rows)
            if (row.ok)
                out << row.scenario << ',' << row.estimator << ',' << row.n << ','
                    << row.replication << ',' << row.seed << ',' << format_number(row.ise) << ','
                    << format_number(row.pmse) << '\n';
        note(dir + "/replications.csv");
    }
    bool any_failed = false;
    for (const McRow& row : result.rows) any_failed |= !row.ok;
    if (any_failed) {
        auto out = open_out(dir + "/failures.csv");
        out << "scenario,estimator,n,replication,seed,message\n";
        for (const McRow& row : result.rows)
            if (!row.ok)
                out << row.scenario << ',' << row.estimator << ',' << row.n << ','
                    << row.replication << ',' << row.seed << ',' << row.message << '\n';
        note(dir + "/failures.csv");
    }
    {
        auto out = open_out(dir + "/aggregate.csv");
        out << "scenario,estimator,n,replications,mean_ise,se_ise,mean_pmse,se_pmse\n";
        for (const McAggregate& agg : result.aggregates)
            out << agg.scenario << ',' << agg.estimator << ',' << agg.n << ',' << agg.completed
                << ',' << format_number(agg.mean_ise) << ',' << format_number(agg.se_ise) << ','
                << format_number(agg.mean_pmse) << ',' << format_number(agg.se_pmse) << '\n';
        note(dir + "/aggregate.csv");
    }
    write_manifest(cfg, "benchmark", dir);
    note(dir + "/manifest.json");
}

}  // namespace adass::cli
