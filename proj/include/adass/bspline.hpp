#pragma once

#include <Eigen/Core>
#include <vector>

#include "adass/core.hpp"

namespace adass {

/// Univariate B-spline basis of a given order on a clamped (open) knot
/// vector: boundary knots repeated `order` times, interior knots evenly
/// spaced. Dimension is interior_knots + order. Immutable after
/// construction and safe to share across threads.
class BasisSystem {
public:
    BasisSystem(int order, int interior_knots, Interval domain);

    int order() const { return order_; }
    int interior_knots() const { return interior_; }
    int dimension() const { return interior_ + order_; }
    Interval domain() const { return domain_; }
    const std::vector<double>& knots() const { return knots_; }

    /// deriv_order-th derivatives of all basis functions at x. Evaluation at
    /// the right domain endpoint uses the left-limit convention, so the last
    /// basis function evaluates to 1 there.
    Eigen::VectorXd evaluate(double x, int deriv_order = 0) const;

    /// One row per evaluation point, one column per basis function.
    Eigen::MatrixXd evaluate_points(const Eigen::VectorXd& xs, int deriv_order = 0) const;

    /// The order() basis values that may be non-zero at x, written to out;
    /// returns the index of the first of them. With from_left, the value is
    /// the limit from below (differs from the plain value only where a basis
    /// function jumps, i.e. for order-1 bases at interior knots).
    int evaluate_local(double x, int deriv_order, double* out, bool from_left = false) const;

private:
    int find_span(double x, bool from_left) const;

    int order_;
    int interior_;
    Interval domain_;
    std::vector<double> knots_;
};

/// Breakpoint sequence tau_0 < ... < tau_{L+1} spanning a domain; its
/// rectangles carry the piecewise constant penalty weights.
struct SubIntervalGrid {
    std::vector<double> breakpoints;

    explicit SubIntervalGrid(std::vector<double> points);
    static SubIntervalGrid uniform(Interval domain, int interior_count);

    int interval_count() const { return static_cast<int>(breakpoints.size()) - 1; }
    double mesh_width() const;
    Interval span() const { return {breakpoints.front(), breakpoints.back()}; }
};

/// Entry (p, q) = integral over `iv` of D^derivA psiA_p times D^derivB
/// psiB_q. Gauss-Legendre applied per knot-span segment at the node count
/// that integrates the piecewise polynomial integrand exactly.
Eigen::MatrixXd product_integral(const BasisSystem& basisA, int derivA,
                                 const BasisSystem& basisB, int derivB, Interval iv);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_legendre(int point_count);

}  // namespace adass
