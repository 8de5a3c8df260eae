#include "adass/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

namespace adass {

CvPlan CvPlan::make(int observation_count, int folds, std::uint64_t seed) {
    if (folds < 2)
        throw Error("insufficient-data", "cross validation needs at least 2 folds");
    if (observation_count < folds)
        throw Error("insufficient-data", "fewer observations than folds");
    std::vector<int> order(observation_count);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, "cv-folds"));
    std::shuffle(order.begin(), order.end(), rng);
    CvPlan plan;
    plan.folds = folds;
    plan.seed = seed;
    plan.assignment.resize(observation_count);
    for (int i = 0; i < observation_count; ++i) plan.assignment[order[i]] = i % folds;
    return plan;
}

RegressionData RegressionData::make(FunctionalSample X, FunctionalSample Y,
                                    const BasisSystem& basis_s, const BasisSystem& basis_t) {
    if (X.size() != Y.size())
        throw Error("domain-mismatch", "predictor and response samples differ in size");
    Eigen::MatrixXd xp = project(X, basis_s);
    Eigen::MatrixXd yp = project(Y, basis_t);
    Eigen::MatrixXd pt = basis_t.evaluate_points(Y.grid, 0);
    return {std::move(X), std::move(Y), basis_s, basis_t,
            std::move(xp), std::move(yp), std::move(pt)};
}

CenteredDesign center_full(const RegressionData& data) {
    if (data.size() == 0)
        throw Error("empty-sample", "cannot center an empty sample");
    const Eigen::RowVectorXd x_mean = data.X_proj.colwise().mean();
    const Eigen::RowVectorXd y_mean = data.Y_proj.colwise().mean();
    const Eigen::VectorXd y_mean_curve = data.Y.values.colwise().mean();
    DesignMatrices design;
    design.X = data.X_proj.rowwise() - x_mean;
    design.Y = data.Y_proj.rowwise() - y_mean;
    const Eigen::VectorXd wt = trapezoid_weights(data.Y.grid);
    const Eigen::MatrixXd yc = data.Y.values.rowwise() - y_mean_curve.transpose();
    design.y_norm_sq = (yc.array().square().matrix() * wt).sum();
    return {std::move(design), data.X.values.colwise().mean(), y_mean_curve};
}

double cv_error(const FitProcedure& fit, const RegressionData& data, const CvPlan& plan) {
    const int n = static_cast<int>(data.size());
    if (static_cast<int>(plan.assignment.size()) != n)
        throw Error("insufficient-data", "fold assignment does not match the sample size");
    if (n < plan.folds)
        throw Error("insufficient-data", "fewer observations than folds");
    const Eigen::VectorXd wt = trapezoid_weights(data.Y.grid);
    double total = 0.0;
    int scored_folds = 0;
    for (int f = 0; f < plan.folds; ++f) {
        std::vector<int> train, held;
        for (int i = 0; i < n; ++i)
            (plan.assignment[i] == f ? held : train).push_back(i);
        if (held.empty()) continue;
        if (train.empty())
            throw Error("insufficient-data", "a fold left no training observations");

        Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(data.X_proj.cols());
        Eigen::RowVectorXd y_mean = Eigen::RowVectorXd::Zero(data.Y_proj.cols());
        Eigen::RowVectorXd y_mean_curve = Eigen::RowVectorXd::Zero(data.Y.values.cols());
        for (int i : train) {
            x_mean += data.X_proj.row(i);
            y_mean += data.Y_proj.row(i);
            y_mean_curve += data.Y.values.row(i);
        }
        x_mean /= train.size();
        y_mean /= train.size();
        y_mean_curve /= train.size();

        DesignMatrices d;
        d.X.resize(train.size(), data.X_proj.cols());
        d.Y.resize(train.size(), data.Y_proj.cols());
        d.y_norm_sq = 0.0;
        for (std::size_t r = 0; r < train.size(); ++r) {
            d.X.row(r) = data.X_proj.row(train[r]) - x_mean;
            d.Y.row(r) = data.Y_proj.row(train[r]) - y_mean;
            const Eigen::RowVectorXd yc = data.Y.values.row(train[r]) - y_mean_curve;
            d.y_norm_sq += yc.array().square().matrix() * wt;
        }

        const CoefficientSurface surface = fit(d);
        double fold_error = 0.0;
        for (int i : held) {
            const Eigen::RowVectorXd xc = data.X_proj.row(i) - x_mean;
            const Eigen::RowVectorXd pred = xc * surface.B * data.psi_t.transpose();
            const Eigen::RowVectorXd resid = data.Y.values.row(i) - y_mean_curve - pred;
            fold_error += resid.array().square().matrix() * wt;
        }
        total += fold_error / held.size();
        ++scored_folds;
    }
    if (scored_folds == 0)
        throw Error("insufficient-data", "no fold held out any observations");
    return total / scored_folds;
}

GridSearchResult grid_search(
    const std::function<FitProcedure(const std::vector<double>&)>& fit_family,
    const RegressionData& data, const std::vector<std::vector<double>>& grids, const CvPlan& plan,
    int threads) {
    if (grids.empty())
        throw Error("search-failed", "grid search needs at least one parameter grid");
    std::size_t combos = 1;
    for (const auto& g : grids) {
        if (g.empty())
            throw Error("search-failed", "grid search received an empty parameter grid");
        combos *= g.size();
    }
    const auto combination = [&](std::size_t index) {
        std::vector<double> params(grids.size());
        for (std::size_t p = grids.size(); p-- > 0;) {
            params[p] = grids[p][index % grids[p].size()];
            index /= grids[p].size();
        }
        return params;
    };
    std::vector<double> errors(combos);
    std::vector<std::string> failures(combos);
    parallel_for(combos, threads, [&](std::size_t c) {
        try {
            errors[c] = cv_error(fit_family(combination(c)), data, plan);
        } catch (const std::exception& e) {
            errors[c] = std::numeric_limits<double>::infinity();
            failures[c] = e.what();
        }
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < combos; ++c)
        if (errors[c] < errors[best]) best = c;
    if (!std::isfinite(errors[best]))
        throw Error("search-failed", "every grid combination failed: " + failures[0]);
    return {combination(best), errors[best], std::move(errors)};
}

namespace {

struct ParameterView {
    double TuningPoint::* field;
    const Interval ParameterRanges::* range;
    bool log_scale;
};

constexpr ParameterView kParameters[] = {
    {&TuningPoint::lambda_s, &ParameterRanges::lambda_s, true},
    {&TuningPoint::delta_star_s, &ParameterRanges::delta_star_s, false},
    {&TuningPoint::gamma_s, &ParameterRanges::gamma_s, false},
    {&TuningPoint::lambda_t, &ParameterRanges::lambda_t, true},
    {&TuningPoint::delta_star_t, &ParameterRanges::delta_star_t, false},
    {&TuningPoint::gamma_t, &ParameterRanges::gamma_t, false},
};

double clamp_to(const Interval& range, double v) { return std::clamp(v, range.lo, range.hi); }

TuningPoint sample_point(const ParameterRanges& ranges, std::mt19937_64& rng) {
    TuningPoint p;
    for (const auto& view : kParameters) {
        const Interval& range = ranges.*(view.range);
        if (range.lo > range.hi)
            throw Error("search-failed", "a parameter range is reversed");
        if (range.lo == range.hi) {
            p.*(view.field) = range.lo;
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (view.log_scale) {
            if (!(range.lo > 0.0))
                throw Error("search-failed", "lambda ranges must be positive");
            p.*(view.field) = std::exp(std::log(range.lo) +
                                       u(rng) * (std::log(range.hi) - std::log(range.lo)));
        } else {
            p.*(view.field) = range.lo + u(rng) * (range.hi - range.lo);
        }
    }
    return p;
}

TuningPoint perturb_point(const TuningPoint& source, const EaassConfig& config,
                          std::mt19937_64& rng) {
    TuningPoint p = source;
    p.cv_error = std::numeric_limits<double>::quiet_NaN();
    std::bernoulli_distribution coin(0.5);
    for (const auto& view : kParameters) {
        const Interval& range = config.ranges.*(view.range);
        if (range.lo == range.hi) continue;
        double v = p.*(view.field);
        if (v == 0.0) {
            // A zero survives multiplication; step off additively instead.
            v = coin(rng) ? 0.01 : -0.01;
        } else {
            v *= coin(rng) ? config.perturb_factors.first : config.perturb_factors.second;
        }
        p.*(view.field) = clamp_to(range, v);
    }
    return p;
}

}  // namespace

EaassResult eaass_minimize(const std::function<double(const TuningPoint&)>& objective,
                           const EaassConfig& config) {
    if (config.population_size < 2)
        throw Error("search-failed", "population size must be at least 2");
    if (!(config.truncation_fraction > 0.0) || !(config.truncation_fraction < 1.0))
        throw Error("search-failed", "truncation fraction must lie in (0, 1)");
    if (!(config.perturb_factors.first > 0.0) || !(config.perturb_factors.second > 0.0))
        throw Error("search-failed", "perturbation factors must be positive");
    if (config.max_iterations < 0)
        throw Error("search-failed", "iteration count must be non-negative");

    std::mt19937_64 rng(derive_seed(config.seed, "eaass"));
    const int pop = config.population_size;
    std::vector<TuningPoint> population(pop);
    for (int i = 0; i < pop; ++i) population[i] = sample_point(config.ranges, rng);

    EaassResult result;
    std::vector<std::string> failures;
    const auto evaluate_members = [&](const std::vector<int>& members, int iteration) {
        std::vector<double> scores(members.size());
        std::vector<std::string> errors(members.size());
        parallel_for(members.size(), config.threads, [&](std::size_t k) {
            try {
                scores[k] = objective(population[members[k]]);
            } catch (const std::exception& e) {
                scores[k] = std::numeric_limits<double>::infinity();
                errors[k] = e.what();
            }
        });
        for (std::size_t k = 0; k < members.size(); ++k) {
            population[members[k]].cv_error = scores[k];
            if (!errors[k].empty()) failures.push_back(errors[k]);
            result.evaluations.push_back({iteration, members[k], population[members[k]]});
        }
    };

    std::vector<int> everyone(pop);
    std::iota(everyone.begin(), everyone.end(), 0);
    evaluate_members(everyone, 0);

    const auto ranking = [&] {
        std::vector<int> order(pop);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return population[a].cv_error < population[b].cv_error;
        });
        return order;
    };
    const auto record_best = [&] {
        const int best = ranking().front();
        result.best_history.push_back(population[best].cv_error);
        return best;
    };
    if (!std::isfinite(population[record_best()].cv_error)) {
        std::string causes;
        for (const auto& f : failures) causes += (causes.empty() ? "" : "; ") + f;
        throw Error("search-failed", "every initial evaluation failed: " + causes);
    }

    const int replaced_count =
        std::min(pop - 1, static_cast<int>(std::ceil(config.truncation_fraction * pop)));
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        const std::vector<int> order = ranking();
        const int survivors = pop - replaced_count;
        std::uniform_int_distribution<int> pick(0, survivors - 1);
        std::vector<int> replaced(order.end() - replaced_count, order.end());
        for (int slot : replaced)
            population[slot] = perturb_point(population[order[pick(rng)]], config, rng);
        evaluate_members(replaced, iter);
        record_best();
    }
    result.best = population[ranking().front()];
    return result;
}

EaassResult eaass(const RegressionData& data, const PenaltySystem& penalty,
                  const Eigen::MatrixXd& deriv_values_s, const Eigen::MatrixXd& deriv_values_t,
                  const EaassConfig& config, const CvPlan& plan) {
    const auto objective = [&](const TuningPoint& tuning) {
        PenaltySystem local = penalty;
        local.set_adaptive_weights(deriv_values_s, deriv_values_t, tuning);
        const FitProcedure fit = [&local, &tuning](const DesignMatrices& d) {
            return fit_adass(d, local, tuning);
        };
        return cv_error(fit, data, plan);
    };
    return eaass_minimize(objective, config);
}

std::pair<BasisSystem, BasisSystem> make_bases(const EstimatorSettings& settings,
                                               Interval domain_s, Interval domain_t) {
    return {BasisSystem(settings.order_s, settings.interior_s, domain_s),
            BasisSystem(settings.order_t, settings.interior_t, domain_t)};
}

std::pair<SubIntervalGrid, SubIntervalGrid> default_breakpoint_grids(const BasisSystem& basis_s,
                                                                     const BasisSystem& basis_t) {
    return {SubIntervalGrid::uniform(basis_s.domain(), basis_s.interior_knots()),
            SubIntervalGrid::uniform(basis_t.domain(), basis_t.interior_knots())};
}

SmoothFitResult fit_smooth_cv(const RegressionData& data, const EstimatorSettings& settings,
                              const CvPlan& plan, int threads) {
    const auto family = [&](const std::vector<double>& params) -> FitProcedure {
        const double ls = params[0], lt = params[1];
        return [&, ls, lt](const DesignMatrices& d) {
            return fit_smooth(d, data.basis_s, data.basis_t, ls, lt, settings.deriv_s,
                              settings.deriv_t);
        };
    };
    const GridSearchResult sel =
        grid_search(family, data, {settings.smooth_ladder, settings.smooth_ladder}, plan, threads);
    const CenteredDesign full = center_full(data);
    CoefficientSurface surface = fit_smooth(full.design, data.basis_s, data.basis_t,
                                            sel.parameters[0], sel.parameters[1],
                                            settings.deriv_s, settings.deriv_t);
    return {std::move(surface), sel.parameters[0], sel.parameters[1], sel.cv_error};
}

AdassFitResult fit_adass_auto(const RegressionData& data, const EstimatorSettings& settings,
                              const CvPlan& plan, int threads,
                              const std::function<double(double, double)>* true_beta,
                              const SmoothFitResult* initial_fit) {
    const auto [grid_s, grid_t] = default_breakpoint_grids(data.basis_s, data.basis_t);
    PenaltySystem penalty = PenaltySystem::make(data.basis_s, data.basis_t, grid_s, grid_t,
                                                settings.deriv_s, settings.deriv_t);

    Eigen::MatrixXd d_s, d_t;
    double init_ls = 0.0, init_lt = 0.0;
    if (true_beta != nullptr) {
        std::tie(d_s, d_t) = finite_difference_derivatives(*true_beta, settings.deriv_s,
                                                           settings.deriv_t, grid_s, grid_t);
    } else {
        std::optional<SmoothFitResult> computed;
        if (initial_fit == nullptr) {
            computed = fit_smooth_cv(data, settings, plan, threads);
            initial_fit = &*computed;
        }
        init_ls = initial_fit->lambda_s;
        init_lt = initial_fit->lambda_t;
        std::tie(d_s, d_t) = initial_derivatives(initial_fit->surface, settings.deriv_s,
                                                 settings.deriv_t, grid_s, grid_t);
    }

    EaassConfig config = settings.eaass;
    config.threads = threads;
    EaassResult search = eaass(data, penalty, d_s, d_t, config, plan);

    penalty.set_adaptive_weights(d_s, d_t, search.best);
    const CenteredDesign full = center_full(data);
    CoefficientSurface surface = fit_adass(full.design, penalty, search.best);
    return {std::move(surface), search.best,          std::move(search.best_history),
            std::move(search.evaluations), init_ls, init_lt};
}

}  // namespace adass
