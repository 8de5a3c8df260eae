#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adass/fdata.hpp"
#include "adass/tuning.hpp"

namespace adass {

/// A simulation scenario: a named true coefficient function on the unit
/// square.
struct Scenario {
    std::string name;
    std::function<double(double, double)> beta;
    Interval domain_s{0.0, 1.0};
    Interval domain_t{0.0, 1.0};

    static Scenario mexican_hat();
    static Scenario dampened_harmonic();
    static Scenario rapid_change();
    static Scenario by_name(const std::string& name);
    static const std::vector<std::string>& names();
};

double beta_eval(const Scenario& scenario, double s, double t);

/// Generation settings for one dataset draw.
struct GenConfig {
    int n = 100;
    int test_n = 4000;
    int s_points = 201;
    int t_points = 201;
    double sn_target = 4.0;
    int x_basis_count = 32;
    int e_basis_count = 20;
    std::uint64_t seed = 0;
};

/// cfg.n covariate curves: standard normal combinations of cubic B-splines
/// with evenly spaced knots, sampled on a uniform grid.
FunctionalSample gen_covariates(const GenConfig& cfg);

struct ResponseResult {
    FunctionalSample Y;
    double noise_scale = 0.0;  // the calibrated k
};

/// Signal curves integral of X_i(s) beta(s, t) ds plus spline noise scaled so
/// the signal-to-noise ratio hits cfg.sn_target. The raw error draws depend
/// only on the seed, never on the target.
ResponseResult gen_response(const FunctionalSample& X, const Scenario& scenario,
                            const GenConfig& cfg);

/// Response with a known noise scale (reusing the scale calibrated on a
/// training draw); works for empty X.
FunctionalSample synth_response(const FunctionalSample& X, const Scenario& scenario,
                                const GenConfig& cfg, double noise_scale);

/// Re-estimates the signal-to-noise ratio: the realized signal variance of X
/// against the empirical variance of fresh error draws at the given scale.
double estimate_sn(const FunctionalSample& X, const Scenario& scenario, const GenConfig& cfg,
                   double noise_scale, int draw_count, std::uint64_t seed);

enum class EstimatorKind { smooth, adass, adass_true };

std::string estimator_name(EstimatorKind kind);
EstimatorKind estimator_by_name(const std::string& name);

struct McRow {
    std::string scenario;
    std::string estimator;
    int n = 0;
    int replication = 0;
    std::uint64_t seed = 0;
    double ise = 0.0;
    double pmse = 0.0;
    bool ok = true;
    std::string message;
};

struct McAggregate {
    std::string scenario;
    std::string estimator;
    int n = 0;
    int completed = 0;
    double mean_ise = 0.0;
    double se_ise = 0.0;
    double mean_pmse = 0.0;
    double se_pmse = 0.0;
};

struct McResult {
    std::vector<McRow> rows;
    std::vector<McAggregate> aggregates;
};

/// Repeated train/test draws; per replication each requested estimator is
/// tuned, fitted and scored by ISE and PMSE. Replication failures are
/// recorded without aborting; only a fully failed study raises.
McResult run_monte_carlo(const Scenario& scenario, const GenConfig& cfg,
                         const EstimatorSettings& settings, int replications,
                         const std::vector<EstimatorKind>& estimators, int threads = 1);

}  // namespace adass
