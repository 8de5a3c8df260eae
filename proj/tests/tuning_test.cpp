#include <doctest.h>

#include <cmath>
#include <set>

#include "adass/tuning.hpp"
#include "support.hpp"

using adass::BasisSystem;
using adass::CvPlan;
using adass::EaassConfig;
using adass::EaassResult;
using adass::Error;
using adass::FunctionalSample;
using adass::RegressionData;
using adass::TuningPoint;

namespace {

// Noiseless model data with the truth in the estimator span, as samples on
// dense grids (the estimator sees them only through its own quadrature).
RegressionData in_span_data(const BasisSystem& bs, const BasisSystem& bt, int curves,
                            std::uint64_t seed) {
    const auto xs = testsupport::random_spline_sample(bs, curves, 2001, seed);
    const auto truth = testsupport::exact_in_span_instance(bs, bt, 1, seed + 1).B_true;
    const Eigen::VectorXd t_grid = Eigen::VectorXd::LinSpaced(1001, 0.0, 1.0);
    const Eigen::MatrixXd y_values =
        adass::predict({bs, bt, truth}, xs.sample, t_grid);
    return RegressionData::make(xs.sample, FunctionalSample(t_grid, y_values), bs, bt);
}

adass::FitProcedure tiny_smooth_fit(const BasisSystem& bs, const BasisSystem& bt) {
    return [&bs, &bt](const adass::DesignMatrices& d) {
        return adass::fit_smooth(d, bs, bt, 1e-12, 1e-12);
    };
}

}  // namespace

TEST_CASE("cv plans partition the data") {
    const CvPlan plan = CvPlan::make(23, 10, 77);
    REQUIRE(plan.assignment.size() == 23);
    std::vector<int> counts(10, 0);
    for (int f : plan.assignment) {
        REQUIRE(f >= 0);
        REQUIRE(f < 10);
        ++counts[f];
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);

    const CvPlan again = CvPlan::make(23, 10, 77);
    CHECK(again.assignment == plan.assignment);
    const CvPlan other = CvPlan::make(23, 10, 78);
    CHECK(other.assignment != plan.assignment);

    CHECK_THROWS_AS(CvPlan::make(5, 10, 1), Error);
    CHECK_THROWS_AS(CvPlan::make(5, 1, 1), Error);
}

TEST_CASE("cv error on noiseless in-span data is numerically zero") {
    const BasisSystem bs(4, 2, {0.0, 1.0});
    const BasisSystem bt(4, 2, {0.0, 1.0});
    const RegressionData data = in_span_data(bs, bt, 24, 4001);
    const CvPlan plan = CvPlan::make(24, 6, 5);
    CHECK(adass::cv_error(tiny_smooth_fit(bs, bt), data, plan) < 1e-6);
}

TEST_CASE("cv error of the zero predictor on unit-norm responses is one") {
    const BasisSystem bs(4, 2, {0.0, 1.0});
    const BasisSystem bt(4, 2, {0.0, 1.0});
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(201, 0.0, 1.0);
    Eigen::MatrixXd y(4, grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const double h = std::sqrt(2.0) * std::sin(2.0 * M_PI * grid[g]);
        y(0, g) = h;
        y(1, g) = -h;
        y(2, g) = h;
        y(3, g) = -h;
    }
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, grid.size());
    const RegressionData data =
        RegressionData::make(FunctionalSample(grid, x), FunctionalSample(grid, y), bs, bt);

    CvPlan plan;  // hand-built folds keep each training half antisymmetric
    plan.folds = 2;
    plan.assignment = {0, 0, 1, 1};
    const adass::FitProcedure zero_fit = [&](const adass::DesignMatrices&) {
        return adass::CoefficientSurface(
            bs, bt, Eigen::MatrixXd::Zero(bs.dimension(), bt.dimension()));
    };
    CHECK(adass::cv_error(zero_fit, data, plan) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cv error determinism and size checks") {
    const BasisSystem bs(4, 1, {0.0, 1.0});
    const BasisSystem bt(4, 1, {0.0, 1.0});
    const RegressionData data = in_span_data(bs, bt, 12, 900);
    const CvPlan plan = CvPlan::make(12, 4, 11);
    const double first = adass::cv_error(tiny_smooth_fit(bs, bt), data, plan);
    const double second = adass::cv_error(tiny_smooth_fit(bs, bt), data, plan);
    CHECK(first == second);

    CvPlan tiny = plan;
    tiny.assignment.resize(5);
    CHECK_THROWS_AS(adass::cv_error(tiny_smooth_fit(bs, bt), data, tiny), Error);

    // A hand-built plan may leave a fold empty; it is skipped, not averaged.
    CvPlan sparse = plan;
    sparse.folds = 3;
    for (std::size_t i = 0; i < sparse.assignment.size(); ++i)
        sparse.assignment[i] = static_cast<int>(i % 2);
    const double sparse_cv = adass::cv_error(tiny_smooth_fit(bs, bt), data, sparse);
    CHECK(std::isfinite(sparse_cv));
}

TEST_CASE("grid search") {
    const BasisSystem bs(4, 2, {0.0, 1.0});
    const BasisSystem bt(4, 2, {0.0, 1.0});
    const RegressionData data = in_span_data(bs, bt, 20, 321);
    const CvPlan plan = CvPlan::make(20, 5, 3);
    const auto family = [&](const std::vector<double>& p) -> adass::FitProcedure {
        const double ls = p[0], lt = p[1];
        return [&, ls, lt](const adass::DesignMatrices& d) {
            return adass::fit_smooth(d, bs, bt, ls, lt);
        };
    };

    SUBCASE("single point grid returns that point") {
        const auto result = adass::grid_search(family, data, {{0.5}, {0.25}}, plan);
        CHECK(result.parameters == std::vector<double>{0.5, 0.25});
    }
    SUBCASE("recovers the oracle-best lambda on noiseless data") {
        const auto result =
            adass::grid_search(family, data, {{1e-12, 1e3}, {1e-12, 1e3}}, plan);
        CHECK(result.parameters == std::vector<double>{1e-12, 1e-12});
    }
    SUBCASE("returned error is the minimum of the evaluated errors") {
        const std::vector<double> ladder{1e-8, 1e-2, 1e2};
        const auto result = adass::grid_search(family, data, {ladder, ladder}, plan, 2);
        REQUIRE(result.all_errors.size() == 9);
        CHECK(result.cv_error == *std::min_element(result.all_errors.begin(),
                                                   result.all_errors.end()));
    }
}

namespace {

// Convex quadratic surrogate in the log lambdas; gamma and delta are pinned
// by collapsed ranges so only two parameters evolve.
struct Surrogate {
    double opt_log_s;
    double opt_log_t;
    double operator()(const TuningPoint& p) const {
        const double a = std::log10(p.lambda_s) - opt_log_s;
        const double b = std::log10(p.lambda_t) - opt_log_t;
        return a * a + b * b;
    }
};

EaassConfig surrogate_config(std::uint64_t seed) {
    EaassConfig config;
    config.population_size = 20;
    config.truncation_fraction = 0.2;
    config.max_iterations = 50;
    config.ranges.lambda_s = {1e-2, 1e2};
    config.ranges.lambda_t = {1e-2, 1e2};
    config.ranges.gamma_s = {0.0, 0.0};
    config.ranges.gamma_t = {0.0, 0.0};
    config.ranges.delta_star_s = {0.0, 0.0};
    config.ranges.delta_star_t = {0.0, 0.0};
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("evolutionary search core") {
    const Surrogate objective{0.37, -0.81};

    SUBCASE("zero iterations return the best of the initial population") {
        EaassConfig config = surrogate_config(1);
        config.max_iterations = 0;
        const EaassResult result = adass::eaass_minimize(objective, config);
        CHECK(result.best_history.size() == 1);
        CHECK(result.evaluations.size() == 20);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& rec : result.evaluations) best = std::min(best, rec.point.cv_error);
        CHECK(result.best.cv_error == best);
    }
    SUBCASE("best history is non-increasing and population size is constant") {
        const EaassConfig config = surrogate_config(2);
        const EaassResult result = adass::eaass_minimize(objective, config);
        REQUIRE(result.best_history.size() == 51);
        for (std::size_t i = 1; i < result.best_history.size(); ++i)
            CHECK(result.best_history[i] <= result.best_history[i - 1]);
        // 20 initial evaluations, then ceil(0.2 * 20) = 4 per iteration.
        CHECK(result.evaluations.size() == 20 + 50 * 4);
        std::set<int> members;
        for (const auto& rec : result.evaluations) {
            CHECK(rec.member >= 0);
            CHECK(rec.member < 20);
            members.insert(rec.member);
        }
        CHECK(members.size() == 20);
    }
    SUBCASE("identical seeds give identical searches") {
        const EaassResult a = adass::eaass_minimize(objective, surrogate_config(3));
        const EaassResult b = adass::eaass_minimize(objective, surrogate_config(3));
        CHECK(a.best.lambda_s == b.best.lambda_s);
        CHECK(a.best.lambda_t == b.best.lambda_t);
        CHECK(a.best.cv_error == b.best.cv_error);
        CHECK(a.best_history == b.best_history);
    }
    SUBCASE("returned error was actually computed") {
        const EaassResult result = adass::eaass_minimize(objective, surrogate_config(4));
        bool found = false;
        for (const auto& rec : result.evaluations)
            if (rec.point.cv_error == result.best.cv_error &&
                rec.point.lambda_s == result.best.lambda_s)
                found = true;
        CHECK(found);
    }
    SUBCASE("all evaluations failing raises search-failed") {
        const auto broken = [](const TuningPoint&) -> double {
            throw Error("singular-system", "forced failure");
        };
        try {
            adass::eaass_minimize(broken, surrogate_config(5));
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == "search-failed");
        }
    }
    SUBCASE("pinned parameters never move") {
        const EaassResult result = adass::eaass_minimize(objective, surrogate_config(6));
        for (const auto& rec : result.evaluations) {
            CHECK(rec.point.gamma_s == 0.0);
            CHECK(rec.point.delta_star_t == 0.0);
        }
    }
}

TEST_CASE("surrogate localization over twenty seeds") {
    // Within one multiplicative perturbation step per coordinate.
    const double step = std::log10(1.0 / 0.8) + 1e-12;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Surrogate objective{0.37, -0.81};
        const EaassResult result = adass::eaass_minimize(objective, surrogate_config(seed));
        const double err_s = std::abs(std::log10(result.best.lambda_s) - 0.37);
        const double err_t = std::abs(std::log10(result.best.lambda_t) + 0.81);
        if (err_s <= step && err_t <= step) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("gamma escapes zero through the additive step") {
    // Objective rewards gamma > 0, so perturbation must be able to leave 0.
    const auto objective = [](const TuningPoint& p) {
        return std::abs(p.gamma_s - 0.05) + std::abs(std::log10(p.lambda_s));
    };
    EaassConfig config = surrogate_config(9);
    config.ranges.gamma_s = {0.0, 4.0};
    config.max_iterations = 50;
    const EaassResult result = adass::eaass_minimize(objective, config);
    bool saw_positive_gamma = false;
    for (const auto& rec : result.evaluations)
        if (rec.iteration > 0 && rec.point.gamma_s > 0.0) saw_positive_gamma = true;
    CHECK(saw_positive_gamma);
}

TEST_CASE("eaass over real fits") {
    const BasisSystem bs(4, 3, {0.0, 1.0});
    const BasisSystem bt(4, 3, {0.0, 1.0});
    const RegressionData data = in_span_data(bs, bt, 18, 2222);
    const CvPlan plan = CvPlan::make(18, 6, 13);
    const auto [gs, gt] = adass::default_breakpoint_grids(bs, bt);
    const adass::PenaltySystem penalty = adass::PenaltySystem::make(bs, bt, gs, gt, 2, 2);
    const Eigen::MatrixXd derivs = Eigen::MatrixXd::Ones(gs.interval_count(), gt.interval_count());

    EaassConfig config;
    config.population_size = 6;
    config.max_iterations = 3;
    config.seed = 17;
    config.threads = 2;
    const EaassResult result = adass::eaass(data, penalty, derivs, derivs, config, plan);
    REQUIRE(result.best_history.size() == 4);
    for (std::size_t i = 1; i < result.best_history.size(); ++i)
        CHECK(result.best_history[i] <= result.best_history[i - 1]);
    CHECK(std::isfinite(result.best.cv_error));

    const EaassResult rerun = adass::eaass(data, penalty, derivs, derivs, config, plan);
    CHECK(rerun.best.cv_error == result.best.cv_error);
    CHECK(rerun.best.lambda_s == result.best.lambda_s);
}

TEST_CASE("smooth and adaptive workflows") {
    const BasisSystem bs(4, 3, {0.0, 1.0});
    const BasisSystem bt(4, 3, {0.0, 1.0});
    const RegressionData data = in_span_data(bs, bt, 21, 3333);
    const CvPlan plan = CvPlan::make(21, 7, 19);

    adass::EstimatorSettings settings;
    settings.order_s = settings.order_t = 4;
    settings.interior_s = settings.interior_t = 3;
    settings.smooth_ladder = {1e-10, 1e-2};
    settings.cv_folds = 7;
    settings.eaass.population_size = 6;
    settings.eaass.max_iterations = 2;
    settings.eaass.seed = 5;

    const adass::SmoothFitResult smooth = adass::fit_smooth_cv(data, settings, plan, 2);
    CHECK(smooth.lambda_s == 1e-10);  // noiseless data prefers the tiny penalty
    CHECK(smooth.cv_error < 1e-6);

    const adass::AdassFitResult adaptive = adass::fit_adass_auto(data, settings, plan, 2);
    CHECK(std::isfinite(adaptive.tuning.cv_error));
    CHECK(adaptive.initial_lambda_s == smooth.lambda_s);
    CHECK(adaptive.surface.B.allFinite());
}
