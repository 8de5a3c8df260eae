#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>

#include "adass/bspline.hpp"
#include "adass/estimator.hpp"
#include "adass/fdata.hpp"

namespace testsupport {

/// Coefficients representing x -> x^degree in the given basis, by dense
/// least squares on a fine collocation grid (exact for polynomials below the
/// basis order, up to solver roundoff).
inline Eigen::VectorXd monomial_coefficients(const adass::BasisSystem& basis, int degree) {
    const int points = 40 * basis.dimension() + 1;
    const Eigen::VectorXd xs =
        Eigen::VectorXd::LinSpaced(points, basis.domain().lo, basis.domain().hi);
    const Eigen::MatrixXd collocation = basis.evaluate_points(xs, 0);
    Eigen::VectorXd target(points);
    for (int i = 0; i < points; ++i) target[i] = std::pow(xs[i], degree);
    return collocation.colPivHouseholderQr().solve(target);
}

/// Composite midpoint quadrature of integrand over [lo, hi]; the independent
/// oracle for product integrals.
inline double midpoint_integral(const std::function<double(double)>& integrand, double lo,
                                double hi, int panels) {
    const double h = (hi - lo) / panels;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) acc += integrand(lo + (i + 0.5) * h);
    return acc * h;
}

/// A sample of curves lying in the span of `basis`: rows of `coefficients`
/// hold the spline coefficients of each curve.
struct SplineSample {
    Eigen::MatrixXd coefficients;
    adass::FunctionalSample sample;
};

inline SplineSample random_spline_sample(const adass::BasisSystem& basis, int curves,
                                         int grid_points, std::uint64_t seed,
                                         double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd coeffs(curves, basis.dimension());
    for (int i = 0; i < curves; ++i)
        for (int j = 0; j < basis.dimension(); ++j) coeffs(i, j) = normal(rng);
    const Eigen::VectorXd grid =
        Eigen::VectorXd::LinSpaced(grid_points, basis.domain().lo, basis.domain().hi);
    Eigen::MatrixXd values = coeffs * basis.evaluate_points(grid, 0).transpose();
    return {std::move(coeffs),
            adass::FunctionalSample(grid, std::move(values), basis.domain())};
}

/// Noiseless regression instance with the truth in the estimator span: the
/// predictor projections are drawn directly (well-conditioned X'X; the curve
/// coefficients are implied through the inverse Gram), and the response
/// projections follow exactly from the Gram identity, no quadrature.
struct InSpanInstance {
    Eigen::MatrixXd B_true;
    adass::DesignMatrices design;
};

inline InSpanInstance exact_in_span_instance(const adass::BasisSystem& basis_s,
                                             const adass::BasisSystem& basis_t, int curves,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd B(basis_s.dimension(), basis_t.dimension());
    for (int i = 0; i < B.rows(); ++i)
        for (int j = 0; j < B.cols(); ++j) B(i, j) = normal(rng);

    const Eigen::MatrixXd gram_t =
        adass::product_integral(basis_t, 0, basis_t, 0, basis_t.domain());
    adass::DesignMatrices d;
    d.X.resize(curves, basis_s.dimension());
    for (int i = 0; i < curves; ++i)
        for (int j = 0; j < basis_s.dimension(); ++j) d.X(i, j) = normal(rng);
    d.Y = d.X * B * gram_t;  // exact projections of the noiseless responses
    d.y_norm_sq = (d.X * B * gram_t * B.transpose() * d.X.transpose()).trace();
    return {std::move(B), std::move(d)};
}

}  // namespace testsupport
