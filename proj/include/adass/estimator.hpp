#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "adass/bspline.hpp"
#include "adass/fdata.hpp"

namespace adass {

/// Tensor-product coefficient surface: beta(s, t) = psi_s(s)' * B * psi_t(t).
struct CoefficientSurface {
    BasisSystem basis_s;
    BasisSystem basis_t;
    Eigen::MatrixXd B;

    CoefficientSurface(BasisSystem bs, BasisSystem bt, Eigen::MatrixXd coeffs);

    double evaluate(double s, double t, int deriv_s = 0, int deriv_t = 0) const;

    /// Surface values on the tensor grid; rows follow s_grid, columns t_grid.
    Eigen::MatrixXd evaluate_grid(const Eigen::VectorXd& s_grid,
                                  const Eigen::VectorXd& t_grid) const;
};

/// One combination of the six AdaSS tuning parameters. delta_star scales the
/// largest absolute initial derivative estimate into the weight offset delta.
struct TuningPoint {
    double lambda_s = 1.0;
    double delta_star_s = 0.0;
    double gamma_s = 0.0;
    double lambda_t = 1.0;
    double delta_star_t = 0.0;
    double gamma_t = 0.0;
    double cv_error = std::numeric_limits<double>::quiet_NaN();

    void validate() const;
};

/// Sub-rectangle penalty machinery: per-interval Gram blocks W and roughness
/// blocks R on both axes, plus the piecewise constant weight grids. Copy the
/// system before mutating weights when fitting concurrently.
struct PenaltySystem {
    BasisSystem basis_s;
    BasisSystem basis_t;
    SubIntervalGrid grid_s;
    SubIntervalGrid grid_t;
    int deriv_s = 2;
    int deriv_t = 2;
    std::vector<Eigen::MatrixXd> W_s, R_s;  // one block per s sub-interval
    std::vector<Eigen::MatrixXd> W_t, R_t;  // one block per t sub-interval
    Eigen::MatrixXd weight_s, weight_t;     // (L_s+1) x (L_t+1), default all ones

    static PenaltySystem make(const BasisSystem& basis_s, const BasisSystem& basis_t,
                              const SubIntervalGrid& grid_s, const SubIntervalGrid& grid_t,
                              int deriv_s, int deriv_t);

    /// Whole-domain blocks, i.e. a single sub-rectangle.
    static PenaltySystem make_global(const BasisSystem& basis_s, const BasisSystem& basis_t,
                                     int deriv_s, int deriv_t);

    /// Weights 1 / (|derivative estimate| + delta)^gamma evaluated on the
    /// breakpoint rectangles; delta comes from the delta_star rule.
    void set_adaptive_weights(const Eigen::MatrixXd& deriv_values_s,
                              const Eigen::MatrixXd& deriv_values_t, const TuningPoint& tuning);

    /// Sum over sub-rectangles of lambda_s d^s_ij (W_t,j x R_s,i)
    /// + lambda_t d^t_ij (R_t,j x W_s,i); symmetric positive semidefinite.
    Eigen::MatrixXd assemble(double lambda_s, double lambda_t) const;

    /// Sum of the per-interval Gram blocks on the t axis (the whole-domain
    /// Gram matrix of basis_t).
    Eigen::MatrixXd gram_t() const;
};

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Smoothing-spline fit with constant roughness parameters: the adaptive
/// solve with whole-domain blocks and unit weights.
CoefficientSurface fit_smooth(const DesignMatrices& data, const BasisSystem& basis_s,
                              const BasisSystem& basis_t, double lambda_s, double lambda_t,
                              int deriv_s = 2, int deriv_t = 2);

/// Adaptive fit: vec(B) solves [W_t x X'X + penalty] b = vec(X'Y) with the
/// penalty assembled from the system's weights.
CoefficientSurface fit_adass(const DesignMatrices& data, const PenaltySystem& penalty,
                             const TuningPoint& tuning);

/// Derivative estimates of the surface on the breakpoint rectangles,
/// evaluated at right endpoints (tau_i, tau_j): first the pure s-derivative
/// grid, then the pure t-derivative grid.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> initial_derivatives(const CoefficientSurface& surface,
                                                                int deriv_s, int deriv_t,
                                                                const SubIntervalGrid& grid_s,
                                                                const SubIntervalGrid& grid_t);

/// m-th order pure partial derivative of f on the breakpoint rectangles by
/// central finite differences (step h), matching the initial_derivatives
/// layout. Used when the true coefficient function stands in for the fit.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> finite_difference_derivatives(
    const std::function<double(double, double)>& f, int deriv_s, int deriv_t,
    const SubIntervalGrid& grid_s, const SubIntervalGrid& grid_t, double step = 1e-5);

/// Predicted response curves on t_grid, one row per new predictor curve.
Eigen::MatrixXd predict(const CoefficientSurface& surface, const FunctionalSample& X_new,
                        const Eigen::VectorXd& t_grid);

/// Domain-averaged integrated squared error against a reference function,
/// tensor trapezoid on a dense grid.
double ise(const CoefficientSurface& surface, const std::function<double(double, double)>& beta_true,
           int s_points = 201, int t_points = 201);

/// Mean integrated squared prediction error over a test set.
double pmse(const CoefficientSurface& surface, const FunctionalSample& X_test,
            const FunctionalSample& Y_test);

/// Value of the discretized penalized least-squares objective at B.
double objective_value(const DesignMatrices& data, const Eigen::MatrixXd& gram_t,
                       const Eigen::MatrixXd& penalty, const Eigen::MatrixXd& B);

void save_surface(const CoefficientSurface& surface, const std::string& path);
CoefficientSurface load_surface(const std::string& path);

}  // namespace adass
