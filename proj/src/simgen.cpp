#include "adass/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

namespace adass {

Scenario Scenario::mexican_hat() {
    return {"mexican_hat", [](double s, double t) {
                // Plane plus a narrow bivariate normal density bump at (0.6, 0.6).
                const double var = 0.001;
                const double ds = s - 0.6, dt = t - 0.6;
                const double density = std::exp(-0.5 * (ds * ds + dt * dt) / var) / (2.0 * M_PI * var);
                return -1.0 + 1.5 * s + 1.5 * t + 0.05 * density;
            }};
}

Scenario Scenario::dampened_harmonic() {
    return {"dampened_harmonic", [](double s, double t) {
                return 1.0 + 5.0 * std::exp(-5.0 * (s + t)) *
                                 (std::cos(10.0 * M_PI * s) + std::cos(10.0 * M_PI * t));
            }};
}

Scenario Scenario::rapid_change() {
    return {"rapid_change", [](double s, double t) {
                return 1.0 - 5.0 / (1.0 + std::exp(10.0 * (s + t - 0.2))) +
                       5.0 / (1.0 + std::exp(75.0 * (s + t - 0.8)));
            }};
}

const std::vector<std::string>& Scenario::names() {
    static const std::vector<std::string> all = {"mexican_hat", "dampened_harmonic",
                                                 "rapid_change"};
    return all;
}

Scenario Scenario::by_name(const std::string& name) {
    if (name == "mexican_hat") return mexican_hat();
    if (name == "dampened_harmonic") return dampened_harmonic();
    if (name == "rapid_change") return rapid_change();
    throw Error("unknown-scenario", "unknown scenario '" + name + "'");
}

double beta_eval(const Scenario& scenario, double s, double t) { return scenario.beta(s, t); }

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

Eigen::VectorXd unit_grid(int points) { return Eigen::VectorXd::LinSpaced(points, 0.0, 1.0); }

// Signal curves m_i(t) = integral of X_i(s) beta(s, t) ds, trapezoid in s.
Eigen::MatrixXd signal_curves(const FunctionalSample& X, const Scenario& scenario,
                              const Eigen::VectorXd& t_grid) {
    Eigen::MatrixXd beta_grid(X.grid.size(), t_grid.size());
    for (Eigen::Index i = 0; i < X.grid.size(); ++i)
        for (Eigen::Index j = 0; j < t_grid.size(); ++j)
            beta_grid(i, j) = scenario.beta(X.grid[i], t_grid[j]);
    const Eigen::VectorXd ws = trapezoid_weights(X.grid);
    return X.values * ws.asDiagonal() * beta_grid;
}

struct NoiseParts {
    Eigen::MatrixXd raw;            // n x t_points, unscaled error curves
    Eigen::VectorXd variance_curve; // analytic Var of a raw error curve at each t
};

NoiseParts make_noise(Eigen::Index n, const GenConfig& cfg, const Eigen::VectorXd& t_grid,
                      std::uint64_t seed) {
    const BasisSystem basis(4, cfg.e_basis_count - 4, {0.0, 1.0});
    const Eigen::MatrixXd psi = basis.evaluate_points(t_grid, 0);
    const Eigen::MatrixXd coeffs = normal_matrix(n, basis.dimension(), seed);
    return {coeffs * psi.transpose(), psi.array().square().rowwise().sum()};
}

}  // namespace

FunctionalSample gen_covariates(const GenConfig& cfg) {
    if (cfg.x_basis_count < 5)
        throw Error("invalid-config", "covariate basis count must be at least 5");
    const BasisSystem basis(4, cfg.x_basis_count - 4, {0.0, 1.0});
    const Eigen::VectorXd grid = unit_grid(cfg.s_points);
    const Eigen::MatrixXd coeffs =
        normal_matrix(cfg.n, basis.dimension(), derive_seed(cfg.seed, "covariates"));
    return {grid, coeffs * basis.evaluate_points(grid, 0).transpose(), {0.0, 1.0}};
}

ResponseResult gen_response(const FunctionalSample& X, const Scenario& scenario,
                            const GenConfig& cfg) {
    if (X.size() < 2)
        throw Error("cannot-calibrate",
                    "signal variance needs at least two covariate curves");
    const Eigen::VectorXd t_grid = unit_grid(cfg.t_points);
    const Eigen::VectorXd wt = trapezoid_weights(t_grid);
    const Eigen::MatrixXd m = signal_curves(X, scenario, t_grid);

    const Eigen::RowVectorXd m_mean = m.colwise().mean();
    const Eigen::VectorXd signal_var =
        (m.rowwise() - m_mean).array().square().colwise().sum().transpose() / (X.size() - 1);
    const double signal_integral = wt.dot(signal_var);
    if (!(signal_integral > 0.0))
        throw Error("cannot-calibrate", "zero signal variance; cannot hit the target ratio");

    const NoiseParts noise = make_noise(X.size(), cfg, t_grid, derive_seed(cfg.seed, "errors"));
    const double noise_integral = wt.dot(noise.variance_curve);
    const double k = std::sqrt(signal_integral / (cfg.sn_target * noise_integral));
    return {{t_grid, m + k * noise.raw, {0.0, 1.0}}, k};
}

FunctionalSample synth_response(const FunctionalSample& X, const Scenario& scenario,
                                const GenConfig& cfg, double noise_scale) {
    const Eigen::VectorXd t_grid = unit_grid(cfg.t_points);
    const Eigen::MatrixXd m = signal_curves(X, scenario, t_grid);
    const NoiseParts noise = make_noise(X.size(), cfg, t_grid, derive_seed(cfg.seed, "errors"));
    return {t_grid, m + noise_scale * noise.raw, {0.0, 1.0}};
}

double estimate_sn(const FunctionalSample& X, const Scenario& scenario, const GenConfig& cfg,
                   double noise_scale, int draw_count, std::uint64_t seed) {
    if (X.size() < 2 || draw_count < 2)
        throw Error("cannot-calibrate", "ratio estimation needs at least two curves and draws");
    const Eigen::VectorXd t_grid = unit_grid(cfg.t_points);
    const Eigen::VectorXd wt = trapezoid_weights(t_grid);
    const Eigen::MatrixXd m = signal_curves(X, scenario, t_grid);
    const Eigen::RowVectorXd m_mean = m.colwise().mean();
    const Eigen::VectorXd signal_var =
        (m.rowwise() - m_mean).array().square().colwise().sum().transpose() / (X.size() - 1);

    const NoiseParts noise = make_noise(draw_count, cfg, t_grid, derive_seed(seed, "sn-check"));
    const Eigen::MatrixXd scaled = noise_scale * noise.raw;
    const Eigen::RowVectorXd e_mean = scaled.colwise().mean();
    const Eigen::VectorXd noise_var =
        (scaled.rowwise() - e_mean).array().square().colwise().sum().transpose() / (draw_count - 1);
    return wt.dot(signal_var) / wt.dot(noise_var);
}

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::smooth: return "SMOOTH";
        case EstimatorKind::adass: return "AdaSS";
        case EstimatorKind::adass_true: return "AdaSStrue";
    }
    throw Error("invalid-config", "unknown estimator kind");
}

EstimatorKind estimator_by_name(const std::string& name) {
    if (name == "SMOOTH") return EstimatorKind::smooth;
    if (name == "AdaSS") return EstimatorKind::adass;
    if (name == "AdaSStrue") return EstimatorKind::adass_true;
    throw Error("invalid-config", "unknown estimator '" + name + "'");
}

namespace {

struct ReplicationOutput {
    std::vector<McRow> rows;
};

ReplicationOutput run_replication(const Scenario& scenario, const GenConfig& cfg,
                                  const EstimatorSettings& settings, int replication,
                                  const std::vector<EstimatorKind>& estimators) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, "replication", replication);
    ReplicationOutput out;
    const auto fail_all = [&](const std::string& message) {
        for (EstimatorKind kind : estimators)
            out.rows.push_back({scenario.name, estimator_name(kind), cfg.n, replication, rep_seed,
                                0.0, 0.0, false, message});
    };
    try {
        GenConfig train_cfg = cfg;
        train_cfg.seed = derive_seed(rep_seed, "train");
        const FunctionalSample X_train = gen_covariates(train_cfg);
        const ResponseResult train_resp = gen_response(X_train, scenario, train_cfg);

        GenConfig test_cfg = cfg;
        test_cfg.n = cfg.test_n;
        test_cfg.seed = derive_seed(rep_seed, "test");
        const FunctionalSample X_test = gen_covariates(test_cfg);
        const FunctionalSample Y_test =
            synth_response(X_test, scenario, test_cfg, train_resp.noise_scale);

        const auto [basis_s, basis_t] = make_bases(settings, scenario.domain_s, scenario.domain_t);
        const RegressionData data =
            RegressionData::make(X_train, train_resp.Y, basis_s, basis_t);
        const CvPlan plan =
            CvPlan::make(cfg.n, settings.cv_folds, derive_seed(rep_seed, "folds"));
        const CenteredDesign full = center_full(data);
        const FunctionalSample X_test_c = subtract_mean(X_test, full.x_mean_curve);
        const FunctionalSample Y_test_c = subtract_mean(Y_test, full.y_mean_curve);

        const auto score = [&](EstimatorKind kind, const CoefficientSurface& surface) {
            const double e_ise = ise(surface, scenario.beta, settings.ise_points,
                                     settings.ise_points);
            const double e_pmse =
                X_test_c.size() > 0 ? pmse(surface, X_test_c, Y_test_c) : 0.0;
            out.rows.push_back({scenario.name, estimator_name(kind), cfg.n, replication, rep_seed,
                                e_ise, e_pmse, true, ""});
        };

        // The initial smoothing fit is shared between the SMOOTH row and the
        // AdaSS derivative estimates (same CV plan either way).
        std::optional<SmoothFitResult> smooth_fit;
        const auto smooth = [&]() -> const SmoothFitResult& {
            if (!smooth_fit) smooth_fit = fit_smooth_cv(data, settings, plan, 1);
            return *smooth_fit;
        };

        for (EstimatorKind kind : estimators) {
            try {
                switch (kind) {
                    case EstimatorKind::smooth:
                        score(kind, smooth().surface);
                        break;
                    case EstimatorKind::adass: {
                        EstimatorSettings local = settings;
                        local.eaass.seed = derive_seed(rep_seed, "eaass");
                        const AdassFitResult fit =
                            fit_adass_auto(data, local, plan, 1, nullptr, &smooth());
                        score(kind, fit.surface);
                        break;
                    }
                    case EstimatorKind::adass_true: {
                        EstimatorSettings local = settings;
                        local.eaass.seed = derive_seed(rep_seed, "eaass-true");
                        const std::function<double(double, double)> beta = scenario.beta;
                        const AdassFitResult fit = fit_adass_auto(data, local, plan, 1, &beta);
                        score(kind, fit.surface);
                        break;
                    }
                }
            } catch (const std::exception& e) {
                out.rows.push_back({scenario.name, estimator_name(kind), cfg.n, replication,
                                    rep_seed, 0.0, 0.0, false, e.what()});
            }
        }
    } catch (const std::exception& e) {
        out.rows.clear();
        fail_all(e.what());
    }
    return out;
}

}  // namespace

McResult run_monte_carlo(const Scenario& scenario, const GenConfig& cfg,
                         const EstimatorSettings& settings, int replications,
                         const std::vector<EstimatorKind>& estimators, int threads) {
    if (replications < 1)
        throw Error("invalid-config", "replication count must be at least 1");
    if (estimators.empty())
        throw Error("invalid-config", "no estimators requested");

    std::vector<ReplicationOutput> outputs(replications);
    parallel_for(replications, threads, [&](std::size_t r) {
        outputs[r] = run_replication(scenario, cfg, settings, static_cast<int>(r), estimators);
    });

    McResult result;
    for (auto& o : outputs)
        for (auto& row : o.rows) result.rows.push_back(std::move(row));

    bool any_ok = false;
    for (EstimatorKind kind : estimators) {
        const std::string name = estimator_name(kind);
        std::vector<double> ises, pmses;
        for (const McRow& row : result.rows)
            if (row.ok && row.estimator == name) {
                ises.push_back(row.ise);
                pmses.push_back(row.pmse);
            }
        McAggregate agg{scenario.name, name, cfg.n, static_cast<int>(ises.size()),
                        0.0,           0.0,  0.0,   0.0};
        if (!ises.empty()) {
            any_ok = true;
            const auto mean_se = [](const std::vector<double>& v) {
                const double mean =
                    std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
                if (v.size() < 2) return std::pair<double, double>{mean, 0.0};
                double ss = 0.0;
                for (double x : v) ss += (x - mean) * (x - mean);
                const double sd = std::sqrt(ss / (v.size() - 1));
                return std::pair<double, double>{mean, sd / std::sqrt(double(v.size()))};
            };
            std::tie(agg.mean_ise, agg.se_ise) = mean_se(ises);
            std::tie(agg.mean_pmse, agg.se_pmse) = mean_se(pmses);
        }
        result.aggregates.push_back(agg);
    }
    if (!any_ok) {
        const std::string why = result.rows.empty() ? "no rows" : result.rows.front().message;
        throw Error("benchmark-failed", "every replication failed: " + why);
    }
    return result;
}

}  // namespace adass
