#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "adass/estimator.hpp"
#include "adass/fdata.hpp"

namespace adass {

/// K-fold partition of n observations; fold sizes differ by at most one.
struct CvPlan {
    int folds = 10;
    std::vector<int> assignment;  // fold label per observation
    std::uint64_t seed = 0;

    static CvPlan make(int observation_count, int folds, std::uint64_t seed);
};

/// Raw samples plus everything precomputable for repeated CV fits on them:
/// uncentered projections and the response-grid basis evaluations.
struct RegressionData {
    FunctionalSample X;
    FunctionalSample Y;
    BasisSystem basis_s;
    BasisSystem basis_t;
    Eigen::MatrixXd X_proj;  // n x dim(basis_s), uncentered
    Eigen::MatrixXd Y_proj;  // n x dim(basis_t), uncentered
    Eigen::MatrixXd psi_t;   // |Y.grid| x dim(basis_t)

    static RegressionData make(FunctionalSample X, FunctionalSample Y, const BasisSystem& basis_s,
                               const BasisSystem& basis_t);
    Eigen::Index size() const { return X.size(); }
};

/// Full-sample centered design plus the mean curves needed to center
/// held-out data the same way.
struct CenteredDesign {
    DesignMatrices design;
    Eigen::VectorXd x_mean_curve;
    Eigen::VectorXd y_mean_curve;
};
CenteredDesign center_full(const RegressionData& data);

using FitProcedure = std::function<CoefficientSurface(const DesignMatrices&)>;

/// Average over folds of the held-out prediction error; each fold is centered
/// with its own training mean.
double cv_error(const FitProcedure& fit, const RegressionData& data, const CvPlan& plan);

struct GridSearchResult {
    std::vector<double> parameters;
    double cv_error = 0.0;
    std::vector<double> all_errors;  // one per combination, lexicographic order
};

/// Exhaustive search over the cartesian product of the per-parameter grids;
/// ties keep the first combination in lexicographic order.
GridSearchResult grid_search(
    const std::function<FitProcedure(const std::vector<double>&)>& fit_family,
    const RegressionData& data, const std::vector<std::vector<double>>& grids, const CvPlan& plan,
    int threads = 1);

/// Sampling ranges for the six tuning parameters; lambdas are sampled
/// log-uniformly, the others uniformly. A collapsed range (lo == hi) pins the
/// parameter.
struct ParameterRanges {
    Interval lambda_s{1e-8, 1e2};
    Interval delta_star_s{0.0, 0.1};
    Interval gamma_s{0.0, 4.0};
    Interval lambda_t{1e-8, 1e2};
    Interval delta_star_t{0.0, 0.1};
    Interval gamma_t{0.0, 4.0};
};

struct EaassConfig {
    int population_size = 20;
    double truncation_fraction = 0.20;  // worst share replaced each iteration
    std::pair<double, double> perturb_factors{1.2, 0.8};
    int max_iterations = 15;
    ParameterRanges ranges;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct EaassRecord {
    int iteration = 0;  // 0 = initial population
    int member = 0;
    TuningPoint point;  // cv_error filled in
};

struct EaassResult {
    TuningPoint best;
    std::vector<double> best_history;   // best error after init and each iteration
    std::vector<EaassRecord> evaluations;
};

/// Evolutionary minimization of an arbitrary objective over tuning points:
/// truncation selection plus multiplicative perturbation. Failures of the
/// objective count as +inf; if the whole initial population fails, a
/// search-failed error carries the causes.
EaassResult eaass_minimize(const std::function<double(const TuningPoint&)>& objective,
                           const EaassConfig& config);

/// EAASS over the AdaSS tuning parameters, scoring by K-fold CV error with
/// fixed penalty blocks and fixed initial derivative estimates.
EaassResult eaass(const RegressionData& data, const PenaltySystem& penalty,
                  const Eigen::MatrixXd& deriv_values_s, const Eigen::MatrixXd& deriv_values_t,
                  const EaassConfig& config, const CvPlan& plan);

/// Shared estimator configuration for the high-level fitting workflows.
struct EstimatorSettings {
    int order_s = 4, order_t = 4;
    int interior_s = 20, interior_t = 20;
    int deriv_s = 2, deriv_t = 2;
    std::vector<double> smooth_ladder = {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2};
    EaassConfig eaass;
    int cv_folds = 10;
    int ise_points = 201;
};

std::pair<BasisSystem, BasisSystem> make_bases(const EstimatorSettings& settings,
                                               Interval domain_s, Interval domain_t);

/// Breakpoint grids aligned with the basis interior knots.
std::pair<SubIntervalGrid, SubIntervalGrid> default_breakpoint_grids(const BasisSystem& basis_s,
                                                                     const BasisSystem& basis_t);

struct SmoothFitResult {
    CoefficientSurface surface;
    double lambda_s = 0.0;
    double lambda_t = 0.0;
    double cv_error = 0.0;
};

/// Grid-search tuned smoothing-spline fit on the fully centered sample.
SmoothFitResult fit_smooth_cv(const RegressionData& data, const EstimatorSettings& settings,
                              const CvPlan& plan, int threads = 1);

struct AdassFitResult {
    CoefficientSurface surface;
    TuningPoint tuning;
    std::vector<double> best_history;
    std::vector<EaassRecord> evaluations;
    double initial_lambda_s = 0.0;  // smoothing fit behind the derivative estimates
    double initial_lambda_t = 0.0;
};

/// Full AdaSS workflow: initial smoothing fit (grid search), derivative
/// estimates on the breakpoint grids, EAASS, final fit. When true_beta is
/// given, the derivative estimates come from it by central finite differences
/// instead of the smoothing fit; a precomputed initial fit (same plan) is
/// reused when supplied.
AdassFitResult fit_adass_auto(const RegressionData& data, const EstimatorSettings& settings,
                              const CvPlan& plan, int threads = 1,
                              const std::function<double(double, double)>* true_beta = nullptr,
                              const SmoothFitResult* initial_fit = nullptr);

}  // namespace adass
