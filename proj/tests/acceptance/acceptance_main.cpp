// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier studies honor ADASS_ACCEPT_THREADS (default: all
// hardware threads) and ADASS_CLI (path to the command line binary, needed by
// the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "adass/simgen.hpp"
#include "adass/tuning.hpp"

using namespace adass;
namespace fs = std::filesystem;

namespace {

int failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title)
        : number_(number), title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

    void check(bool ok, const std::string& detail) {
        if (!ok) problems_.push_back(detail);
        details_.push_back((ok ? "" : "FAILED: ") + detail);
    }

    ~Criterion() {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const bool ok = problems_.empty();
        if (!ok) ++failures;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << number_ << ": " << title_
                  << "  (" << static_cast<int>(seconds) << " s)\n";
        for (const auto& d : details_) std::cout << "       - " << d << '\n';
        std::cout << std::flush;
    }

private:
    int number_;
    std::string title_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> problems_;
    std::vector<std::string> details_;
};

int worker_threads() {
    if (const char* env = std::getenv("ADASS_ACCEPT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

void criterion_1_basis() {
    Criterion c(1, "basis correctness: partition of unity, derivatives, quadrature oracle");
    const BasisSystem basis(4, 10, {0.0, 1.0});

    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_sum = 0.0;
    for (int i = 0; i < 1000; ++i)
        worst_sum = std::max(worst_sum, std::abs(basis.evaluate(u(rng), 0).sum() - 1.0));
    c.check(worst_sum < 1e-12, "partition of unity |sum-1| max " + fmt(worst_sum));

    double worst_fd = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < 200; ++i) {
        const double x = 0.05 + 0.9 * u(rng);
        for (int d = 1; d <= 2; ++d) {
            const Eigen::VectorXd numeric =
                (basis.evaluate(x + h, d - 1) - basis.evaluate(x - h, d - 1)) / (2 * h);
            const Eigen::VectorXd exact = basis.evaluate(x, d);
            const double scale = std::max(1.0, exact.cwiseAbs().maxCoeff());
            worst_fd = std::max(worst_fd, (numeric - exact).cwiseAbs().maxCoeff() / scale);
        }
    }
    c.check(worst_fd < 1e-6, "derivative vs finite differences, relative max " + fmt(worst_fd));

    const Eigen::MatrixXd gram = product_integral(basis, 0, basis, 0, {0.0, 1.0});
    double worst_entry = 0.0;
    for (int p = 0; p < basis.dimension(); ++p)
        for (int q = p; q < basis.dimension(); ++q) {
            const int panels = 100000;
            const double width = 1.0 / panels;
            double oracle = 0.0;
            for (int k = 0; k < panels; ++k) {
                const double x = (k + 0.5) * width;
                const Eigen::VectorXd v = basis.evaluate(x, 0);
                oracle += v[p] * v[q];
            }
            oracle *= width;
            worst_entry = std::max(worst_entry, std::abs(gram(p, q) - oracle));
        }
    c.check(worst_entry < 1e-9, "product integral vs 1e5-panel midpoint, max " + fmt(worst_entry));
}

void criterion_2_reduction() {
    Criterion c(2, "adaptive fit with gamma 0 equals the smoothing fit on a lambda grid");
    const BasisSystem bs(4, 8, {0.0, 1.0});
    const BasisSystem bt(4, 8, {0.0, 1.0});

    std::mt19937_64 rng(2002);
    std::normal_distribution<double> normal(0.0, 1.0);
    DesignMatrices design;
    design.X.resize(30, bs.dimension());
    for (Eigen::Index i = 0; i < design.X.rows(); ++i)
        for (Eigen::Index j = 0; j < design.X.cols(); ++j) design.X(i, j) = normal(rng);
    Eigen::MatrixXd truth(bs.dimension(), bt.dimension());
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index j = 0; j < truth.cols(); ++j) truth(i, j) = normal(rng);
    design.Y = design.X * truth * product_integral(bt, 0, bt, 0, {0.0, 1.0});
    for (Eigen::Index i = 0; i < design.Y.rows(); ++i)
        for (Eigen::Index j = 0; j < design.Y.cols(); ++j) design.Y(i, j) += 0.1 * normal(rng);

    const auto [grid_s, grid_t] = default_breakpoint_grids(bs, bt);
    PenaltySystem penalty = PenaltySystem::make(bs, bt, grid_s, grid_t, 2, 2);
    Eigen::MatrixXd fake(grid_s.interval_count(), grid_t.interval_count());
    for (Eigen::Index i = 0; i < fake.rows(); ++i)
        for (Eigen::Index j = 0; j < fake.cols(); ++j) fake(i, j) = normal(rng);

    double worst = 0.0;
    for (double ls : {1e-6, 1e-2, 1e2})
        for (double lt : {1e-6, 1e-2, 1e2}) {
            TuningPoint tp;
            tp.lambda_s = ls;
            tp.lambda_t = lt;
            tp.delta_star_s = tp.delta_star_t = 0.05;
            tp.gamma_s = tp.gamma_t = 0.0;
            penalty.set_adaptive_weights(fake, fake, tp);
            const CoefficientSurface adaptive = fit_adass(design, penalty, tp);
            const CoefficientSurface smooth = fit_smooth(design, bs, bt, ls, lt, 2, 2);
            worst = std::max(worst, (adaptive.B - smooth.B).cwiseAbs().maxCoeff());
        }
    c.check(worst < 1e-8, "9 lambda pairs, entrywise max difference " + fmt(worst));
}

void criterion_3_trace_vectorization() {
    Criterion c(3, "trace form matches the vectorized penalty; squared-error identity");
    std::mt19937_64 rng(3003);
    std::uniform_int_distribution<int> order_pick(2, 4);
    std::uniform_int_distribution<int> grid_pick(0, 2);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    double worst_penalty = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int ks = order_pick(rng), kt = order_pick(rng);
        const int ms = std::min(2, ks - 1), mt = std::min(2, kt - 1);
        const BasisSystem bs(ks, std::min(8 - ks, 4), {0.0, 1.0});
        const BasisSystem bt(kt, std::min(8 - kt, 4), {0.0, 1.0});
        const SubIntervalGrid gs = SubIntervalGrid::uniform({0.0, 1.0}, grid_pick(rng));
        const SubIntervalGrid gt = SubIntervalGrid::uniform({0.0, 1.0}, grid_pick(rng));
        PenaltySystem ps = PenaltySystem::make(bs, bt, gs, gt, ms, mt);
        for (Eigen::Index i = 0; i < ps.weight_s.rows(); ++i)
            for (Eigen::Index j = 0; j < ps.weight_s.cols(); ++j) {
                ps.weight_s(i, j) = u(rng);
                ps.weight_t(i, j) = u(rng);
            }
        const double ls = u(rng), lt = u(rng);
        Eigen::MatrixXd B(bs.dimension(), bt.dimension());
        for (Eigen::Index i = 0; i < B.rows(); ++i)
            for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) = normal(rng);
        double traces = 0.0;
        for (Eigen::Index i = 0; i < ps.weight_s.rows(); ++i)
            for (Eigen::Index j = 0; j < ps.weight_s.cols(); ++j) {
                traces += ls * ps.weight_s(i, j) *
                          (B.transpose() * ps.R_s[i] * B * ps.W_t[j]).trace();
                traces += lt * ps.weight_t(i, j) *
                          (B.transpose() * ps.W_s[i] * B * ps.R_t[j]).trace();
            }
        Eigen::Map<const Eigen::VectorXd> b(B.data(), B.size());
        const double quadratic = b.dot(ps.assemble(ls, lt) * b);
        worst_penalty =
            std::max(worst_penalty, std::abs(quadratic - traces) / std::max(1.0, std::abs(traces)));
    }
    c.check(worst_penalty < 1e-10,
            "20 instances, worst relative trace mismatch " + fmt(worst_penalty));

    // Squared-error identity on dense grids.
    const BasisSystem bs(4, 3, {0.0, 1.0});
    const BasisSystem bt(4, 3, {0.0, 1.0});
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(8001, 0.0, 1.0);
    Eigen::MatrixXd x_values(4, grid.size()), y_values(4, grid.size());
    const Eigen::MatrixXd psi_s = bs.evaluate_points(grid, 0);
    std::normal_distribution<double> coef(0.0, 1.0);
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd cx(bs.dimension());
        for (Eigen::Index j = 0; j < cx.size(); ++j) cx[j] = coef(rng);
        x_values.row(i) = (psi_s * cx).transpose();
        for (Eigen::Index g = 0; g < grid.size(); ++g)
            y_values(i, g) = std::sin(2.0 * M_PI * (i + 1) * grid[g]) + 0.2 * i;
    }
    const FunctionalSample xs(grid, x_values);
    const FunctionalSample ys(grid, y_values);
    const DesignMatrices design = make_design(xs, ys, bs, bt);
    Eigen::MatrixXd B(bs.dimension(), bt.dimension());
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) = coef(rng);
    const Eigen::MatrixXd gram_t = product_integral(bt, 0, bt, 0, {0.0, 1.0});
    const double algebraic =
        design.y_norm_sq - 2.0 * (design.X * B * design.Y.transpose()).trace() +
        (design.X.transpose() * design.X * B * gram_t * B.transpose()).trace();
    const CoefficientSurface surf{bs, bt, B};
    const Eigen::MatrixXd pred = predict(surf, xs, grid);
    const Eigen::VectorXd wt = trapezoid_weights(grid);
    const double direct = ((y_values - pred).array().square().matrix() * wt).sum();
    const double rel = std::abs(direct - algebraic) / std::abs(direct);
    c.check(rel < 1e-6, "squared-error identity, relative gap " + fmt(rel));
}

void criterion_4_optimality() {
    Criterion c(4, "returned solutions beat random perturbations of the objective");
    std::mt19937_64 rng(4004);
    std::normal_distribution<double> normal(0.0, 1.0);
    bool all_strict = true;
    for (int instance = 0; instance < 10; ++instance) {
        const BasisSystem bs(4, 3, {0.0, 1.0});
        const BasisSystem bt(4, 3, {0.0, 1.0});
        DesignMatrices design;
        design.X.resize(20, bs.dimension());
        for (Eigen::Index i = 0; i < design.X.rows(); ++i)
            for (Eigen::Index j = 0; j < design.X.cols(); ++j) design.X(i, j) = normal(rng);
        design.Y.resize(20, bt.dimension());
        for (Eigen::Index i = 0; i < design.Y.rows(); ++i)
            for (Eigen::Index j = 0; j < design.Y.cols(); ++j) design.Y(i, j) = normal(rng);
        design.y_norm_sq = 0.0;

        const auto [gs, gt] = default_breakpoint_grids(bs, bt);
        PenaltySystem ps = PenaltySystem::make(bs, bt, gs, gt, 2, 2);
        TuningPoint tp;
        tp.lambda_s = 1e-3;
        tp.lambda_t = 1e-2;
        tp.gamma_s = 1.0;
        tp.gamma_t = 2.0;
        tp.delta_star_s = tp.delta_star_t = 0.05;
        Eigen::MatrixXd d(gs.interval_count(), gt.interval_count());
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            for (Eigen::Index j = 0; j < d.cols(); ++j) d(i, j) = normal(rng);
        ps.set_adaptive_weights(d, d, tp);
        const CoefficientSurface fit = fit_adass(design, ps, tp);
        const Eigen::MatrixXd penalty = ps.assemble(tp.lambda_s, tp.lambda_t);
        const Eigen::MatrixXd gram = ps.gram_t();
        const double at_fit = objective_value(design, gram, penalty, fit.B);
        for (int k = 0; k < 100; ++k) {
            Eigen::MatrixXd dir(fit.B.rows(), fit.B.cols());
            for (Eigen::Index i = 0; i < dir.rows(); ++i)
                for (Eigen::Index j = 0; j < dir.cols(); ++j) dir(i, j) = normal(rng);
            dir /= dir.norm();
            if (objective_value(design, gram, penalty, fit.B + 1e-3 * dir) <= at_fit)
                all_strict = false;
        }
    }
    c.check(all_strict, "10 instances x 100 perturbations of size 1e-3, all strictly worse");
}

void criterion_5_noiseless_recovery() {
    Criterion c(5, "noiseless in-span data recovered below 1e-6 by both estimators");
    const BasisSystem bs(4, 4, {0.0, 1.0});
    const BasisSystem bt(4, 4, {0.0, 1.0});
    std::mt19937_64 rng(5005);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd truth(bs.dimension(), bt.dimension());
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
        for (Eigen::Index j = 0; j < truth.cols(); ++j) truth(i, j) = normal(rng);
    const CoefficientSurface truth_surface{bs, bt, truth};
    const auto beta = [&](double s, double t) { return truth_surface.evaluate(s, t); };

    const Eigen::VectorXd s_grid = Eigen::VectorXd::LinSpaced(4001, 0.0, 1.0);
    const Eigen::MatrixXd psi_s = bs.evaluate_points(s_grid, 0);
    Eigen::MatrixXd coeffs(40, bs.dimension());
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i)
        for (Eigen::Index j = 0; j < coeffs.cols(); ++j) coeffs(i, j) = normal(rng);
    const FunctionalSample xs(s_grid, coeffs * psi_s.transpose());
    const Eigen::VectorXd t_grid = Eigen::VectorXd::LinSpaced(2001, 0.0, 1.0);
    const FunctionalSample ys(t_grid, predict(truth_surface, xs, t_grid));

    const DesignMatrices design = make_design(xs, ys, bs, bt);
    const CoefficientSurface smooth = fit_smooth(design, bs, bt, 1e-12, 1e-12, 2, 2);
    const double smooth_ise = ise(smooth, beta);
    c.check(smooth_ise < 1e-6, "smoothing fit ISE " + fmt(smooth_ise));

    const auto [gs, gt] = default_breakpoint_grids(bs, bt);
    PenaltySystem ps = PenaltySystem::make(bs, bt, gs, gt, 2, 2);
    TuningPoint tp;
    tp.lambda_s = tp.lambda_t = 1e-12;
    tp.gamma_s = tp.gamma_t = 1.0;
    tp.delta_star_s = tp.delta_star_t = 0.05;
    const auto [d_s, d_t] = initial_derivatives(smooth, 2, 2, gs, gt);
    ps.set_adaptive_weights(d_s, d_t, tp);
    const CoefficientSurface adaptive = fit_adass(design, ps, tp);
    const double adass_ise = ise(adaptive, beta);
    c.check(adass_ise < 1e-6, "adaptive fit ISE " + fmt(adass_ise));
}

void criterion_6_eaass() {
    Criterion c(6, "evolutionary search: monotone history on a real fit, surrogate localization");
    const int threads = worker_threads();

    // Real fit on the Mexican hat at the default configuration.
    {
        const Scenario scenario = Scenario::mexican_hat();
        GenConfig gen;
        gen.n = 100;
        gen.seed = 606060;
        GenConfig train = gen;
        train.seed = derive_seed(gen.seed, "train");
        const FunctionalSample x = gen_covariates(train);
        const ResponseResult resp = gen_response(x, scenario, train);
        EstimatorSettings settings;
        const auto [bs, bt] = make_bases(settings, {0.0, 1.0}, {0.0, 1.0});
        const RegressionData data = RegressionData::make(x, resp.Y, bs, bt);
        const CvPlan plan = CvPlan::make(gen.n, settings.cv_folds, derive_seed(gen.seed, "folds"));
        settings.eaass.seed = derive_seed(gen.seed, "eaass");
        settings.eaass.threads = threads;
        const AdassFitResult fit = fit_adass_auto(data, settings, plan, threads);
        bool monotone = fit.best_history.size() == 16;
        for (std::size_t i = 1; i < fit.best_history.size(); ++i)
            monotone = monotone && fit.best_history[i] <= fit.best_history[i - 1];
        c.check(monotone, "15-iteration best-error history non-increasing on a real fit ("
                              + fmt(fit.best_history.front()) + " -> "
                              + fmt(fit.best_history.back()) + ")");
    }

    // Convex quadratic surrogate in the log lambdas, 20 seeds.
    const double step = std::log10(1.0 / 0.8) + 1e-12;
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
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
        const auto objective = [](const TuningPoint& p) {
            const double a = std::log10(p.lambda_s) - 0.37;
            const double b = std::log10(p.lambda_t) + 0.81;
            return a * a + b * b;
        };
        const EaassResult result = eaass_minimize(objective, config);
        if (std::abs(std::log10(result.best.lambda_s) - 0.37) <= step &&
            std::abs(std::log10(result.best.lambda_t) + 0.81) <= step)
            ++hits;
    }
    c.check(hits >= 18, "surrogate optimum localized within one perturbation step on " +
                            std::to_string(hits) + "/20 seeds");
}

McResult study(const std::string& scenario_name, std::uint64_t seed,
               const std::vector<EstimatorKind>& estimators) {
    const Scenario scenario = Scenario::by_name(scenario_name);
    GenConfig gen;
    gen.n = 100;
    gen.seed = seed;
    const EstimatorSettings settings;  // the default configuration
    return run_monte_carlo(scenario, gen, settings, 10, estimators, worker_threads());
}

double mean_of(const McResult& result, const std::string& estimator, bool pmse_column) {
    for (const auto& agg : result.aggregates)
        if (agg.estimator == estimator) return pmse_column ? agg.mean_pmse : agg.mean_ise;
    return std::numeric_limits<double>::quiet_NaN();
}

void criterion_7_mexican_hat() {
    Criterion c(7, "Mexican hat study: adaptive fit beats the smoothing baseline");
    const McResult result =
        study("mexican_hat", 20260809,
              {EstimatorKind::smooth, EstimatorKind::adass, EstimatorKind::adass_true});
    const double ise_ratio =
        mean_of(result, "AdaSS", false) / mean_of(result, "SMOOTH", false);
    c.check(ise_ratio < 0.8, "mean ISE ratio AdaSS/SMOOTH " + fmt(ise_ratio) + " < 0.8");
    const double pmse_ratio =
        mean_of(result, "AdaSS", true) / mean_of(result, "SMOOTH", true);
    c.check(pmse_ratio <= 1.05, "mean PMSE ratio AdaSS/SMOOTH " + fmt(pmse_ratio) + " <= 1.05");
    const double oracle_ise = mean_of(result, "AdaSStrue", false);
    c.check(oracle_ise <= mean_of(result, "SMOOTH", false),
            "oracle-weighted fit mean ISE " + fmt(oracle_ise) + " <= smoothing baseline");
    for (const auto& row : result.rows)
        if (!row.ok) c.check(false, "replication " + std::to_string(row.replication) +
                                        " failed: " + row.message);
}

void criterion_8_rapid_change() {
    Criterion c(8, "rapid change study: adaptive fit has lower mean ISE");
    const McResult result =
        study("rapid_change", 20260810, {EstimatorKind::smooth, EstimatorKind::adass});
    const double adass = mean_of(result, "AdaSS", false);
    const double smooth = mean_of(result, "SMOOTH", false);
    c.check(adass < smooth,
            "mean ISE AdaSS " + fmt(adass) + " < SMOOTH " + fmt(smooth));
    for (const auto& row : result.rows)
        if (!row.ok) c.check(false, "replication " + std::to_string(row.replication) +
                                        " failed: " + row.message);
}

void criterion_9_sn_calibration() {
    Criterion c(9, "signal-to-noise calibration re-estimates within five percent");
    std::uint64_t index = 0;
    for (const std::string& name : Scenario::names()) {
        const Scenario scenario = Scenario::by_name(name);
        GenConfig gen;
        gen.n = 100;
        gen.seed = derive_seed(909090, "sn-scenario", index);
        GenConfig train = gen;
        train.seed = derive_seed(gen.seed, "train");
        const FunctionalSample x = gen_covariates(train);
        const ResponseResult resp = gen_response(x, scenario, train);
        const double sn =
            estimate_sn(x, scenario, train, resp.noise_scale, 10000, 42 + index);
        const double rel = std::abs(sn - 4.0) / 4.0;
        c.check(rel < 0.05, name + ": re-estimated ratio " + fmt(sn) + " (relative gap " +
                                fmt(rel) + ")");
        ++index;
    }
}

void criterion_10_determinism() {
    Criterion c(10, "benchmark reruns from its manifest byte-for-byte");
    const char* cli = std::getenv("ADASS_CLI");
    if (cli == nullptr) {
        c.check(false, "ADASS_CLI is not set");
        return;
    }
    const fs::path dir =
        fs::temp_directory_path() / ("adass-accept-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    const std::string base = std::string(cli) +
                             " benchmark --scenario rapid_change --n 24 --test-n 8"
                             " --s-points 81 --t-points 81 --interior-knots 6 --cv-folds 4"
                             " --population 6 --iterations 2 --replications 2"
                             " --estimators SMOOTH,AdaSS --seed 77 --threads " +
                             std::to_string(worker_threads());
    const std::string first =
        base + " --out " + (dir / "one").string() + " >/dev/null 2>&1";
    const std::string second = std::string(cli) + " benchmark --config " +
                               (dir / "one" / "manifest.json").string() + " --out " +
                               (dir / "two").string() + " >/dev/null 2>&1";
    c.check(std::system(first.c_str()) == 0, "first benchmark run exits 0");
    c.check(std::system(second.c_str()) == 0, "manifest rerun exits 0");
    for (const char* name : {"replications.csv", "aggregate.csv"}) {
        std::ifstream a(dir / "one" / name), b(dir / "two" / name);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        c.check(a.good() && b.good() && sa.str() == sb.str() && !sa.str().empty(),
                std::string(name) + " identical across reruns");
    }
    fs::remove_all(dir);
}

}  // namespace

int main() {
    std::cout << "adass acceptance suite (" << worker_threads() << " worker threads)\n";
    criterion_1_basis();
    criterion_2_reduction();
    criterion_3_trace_vectorization();
    criterion_4_optimality();
    criterion_5_noiseless_recovery();
    criterion_6_eaass();
    criterion_7_mexican_hat();
    criterion_8_rapid_change();
    criterion_9_sn_calibration();
    criterion_10_determinism();

    std::cout << (failures == 0 ? "all criteria passed\n"
                                : std::to_string(failures) + " criteria failed\n");
    return failures == 0 ? 0 : 1;
}
