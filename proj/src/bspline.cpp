#include "adass/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace adass {

BasisSystem::BasisSystem(int order, int interior_knots, Interval domain)
    : order_(order), interior_(interior_knots), domain_(domain) {
    if (domain.degenerate())
        throw Error("invalid-domain", "basis domain must satisfy lo < hi");
    if (order < 1)
        throw Error("invalid-order", "B-spline order must be >= 1");
    if (interior_knots < 0)
        throw Error("invalid-order", "interior knot count must be >= 0");
    knots_.resize(static_cast<std::size_t>(interior_) + 2 * order_);
    for (int i = 0; i < order_; ++i) knots_[i] = domain.lo;
    for (int i = 0; i < interior_; ++i) {
        const double frac = static_cast<double>(i + 1) / (interior_ + 1);
        knots_[order_ + i] = domain.lo + frac * domain.length();
    }
    for (int i = 0; i < order_; ++i) knots_[order_ + interior_ + i] = domain.hi;
}

int BasisSystem::find_span(double x, bool from_left) const {
    const int lo = order_ - 1;
    const int hi = interior_ + order_ - 1;  // last non-empty span
    if (from_left) {
        // span lying below x: a knot hit at x selects the span ending there
        if (x <= knots_[lo]) return lo;
        auto it = std::lower_bound(knots_.begin() + lo, knots_.begin() + hi + 1, x);
        return std::clamp(static_cast<int>(it - knots_.begin()) - 1, lo, hi);
    }
    if (x >= knots_[hi]) return hi;
    auto it = std::upper_bound(knots_.begin() + lo, knots_.begin() + hi + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
}

namespace {

// Cox-de Boor triangular scheme with derivatives (banded form): fills
// ders[d][j] with the d-th derivative of basis function (span - order + 1 + j)
// at x. Zero-denominator guards cover repeated boundary knots.
void ders_basis(const std::vector<double>& kn, int span, double x, int order, int nderiv,
                std::vector<std::vector<double>>& ders) {
    const int p = order - 1;
    std::vector<std::vector<double>> ndu(order, std::vector<double>(order));
    std::vector<double> left(order), right(order);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - kn[span + 1 - j];
        right[j] = kn[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[j][r] == 0.0 ? 0.0 : ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    ders.assign(nderiv + 1, std::vector<double>(order, 0.0));
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
    if (nderiv == 0) return;

    std::vector<std::vector<double>> a(2, std::vector<double>(order, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0].assign(order, 0.0);
        a[1].assign(order, 0.0);
        a[0][0] = 1.0;
        for (int d = 1; d <= nderiv; ++d) {
            double value = 0.0;
            const int rk = r - d, pk = p - d;
            if (r >= d) {
                const double den = ndu[pk + 1][rk];
                a[s2][0] = den == 0.0 ? 0.0 : a[s1][0] / den;
                value = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = r - 1 <= pk ? d - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                const double den = ndu[pk + 1][rk + j];
                a[s2][j] = den == 0.0 ? 0.0 : (a[s1][j] - a[s1][j - 1]) / den;
                value += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                const double den = ndu[pk + 1][r];
                a[s2][d] = den == 0.0 ? 0.0 : -a[s1][d - 1] / den;
                value += a[s2][d] * ndu[r][pk];
            }
            ders[d][r] = value;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int d = 1; d <= nderiv; ++d) {
        for (int j = 0; j <= p; ++j) ders[d][j] *= factor;
        factor *= p - d;
    }
}

}  // namespace

int BasisSystem::evaluate_local(double x, int deriv_order, double* out, bool from_left) const {
    if (!domain_.contains(x))
        throw Error("out-of-domain", "evaluation point outside the basis domain");
    if (deriv_order < 0 || deriv_order >= order_)
        throw Error("unsupported-derivative",
                    "derivative order must lie in [0, order)");
    const int span = find_span(x, from_left);
    std::vector<std::vector<double>> ders;
    ders_basis(knots_, span, x, order_, deriv_order, ders);
    for (int j = 0; j < order_; ++j) out[j] = ders[deriv_order][j];
    return span - order_ + 1;
}

Eigen::VectorXd BasisSystem::evaluate(double x, int deriv_order) const {
    Eigen::VectorXd result = Eigen::VectorXd::Zero(dimension());
    std::vector<double> local(order_);
    const int first = evaluate_local(x, deriv_order, local.data());
    for (int j = 0; j < order_; ++j) result[first + j] = local[j];
    return result;
}

Eigen::MatrixXd BasisSystem::evaluate_points(const Eigen::VectorXd& xs, int deriv_order) const {
    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(xs.size(), dimension());
    std::vector<double> local(order_);
    for (Eigen::Index i = 0; i < xs.size(); ++i) {
        const int first = evaluate_local(xs[i], deriv_order, local.data());
        for (int j = 0; j < order_; ++j) result(i, first + j) = local[j];
    }
    return result;
}

SubIntervalGrid::SubIntervalGrid(std::vector<double> points) : breakpoints(std::move(points)) {
    if (breakpoints.size() < 2)
        throw Error("invalid-domain", "a breakpoint grid needs at least two points");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw Error("invalid-domain", "breakpoints must be strictly increasing");
}

SubIntervalGrid SubIntervalGrid::uniform(Interval domain, int interior_count) {
    if (domain.degenerate())
        throw Error("invalid-domain", "breakpoint grid domain must satisfy lo < hi");
    if (interior_count < 0)
        throw Error("invalid-domain", "interior breakpoint count must be >= 0");
    std::vector<double> pts(static_cast<std::size_t>(interior_count) + 2);
    for (int i = 0; i < interior_count + 2; ++i)
        pts[i] = domain.lo + domain.length() * i / (interior_count + 1);
    pts.front() = domain.lo;
    pts.back() = domain.hi;
    return SubIntervalGrid(std::move(pts));
}

double SubIntervalGrid::mesh_width() const {
    double width = 0.0;
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        width = std::max(width, breakpoints[i] - breakpoints[i - 1]);
    return width;
}

GaussRule gauss_legendre(int point_count) {
    GaussRule rule;
    rule.nodes.resize(point_count);
    rule.weights.resize(point_count);
    const int n = point_count;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration from the Chebyshev initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
    }
    return rule;
}

Eigen::MatrixXd product_integral(const BasisSystem& basisA, int derivA,
                                 const BasisSystem& basisB, int derivB, Interval iv) {
    if (!same_interval(basisA.domain(), basisB.domain()))
        throw Error("domain-mismatch", "bases must share a common domain");
    const Interval dom = basisA.domain();
    const double tol = 1e-12 * std::max(1.0, std::abs(dom.length()));
    if (iv.lo < dom.lo - tol || iv.hi > dom.hi + tol)
        throw Error("out-of-domain", "integration interval not contained in the basis domain");
    if (iv.hi < iv.lo)
        throw Error("out-of-domain", "integration interval is reversed");
    iv.lo = std::max(iv.lo, dom.lo);
    iv.hi = std::min(iv.hi, dom.hi);

    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(basisA.dimension(), basisB.dimension());
    if (iv.hi <= iv.lo) return result;

    // Segment [iv.lo, iv.hi] at every knot of either basis so the integrand
    // is a single polynomial per segment.
    std::vector<double> cuts{iv.lo};
    auto add_cuts = [&](const std::vector<double>& kn) {
        for (double k : kn)
            if (k > iv.lo && k < iv.hi) cuts.push_back(k);
    };
    add_cuts(basisA.knots());
    add_cuts(basisB.knots());
    cuts.push_back(iv.hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const int points = std::max(1, (basisA.order() + basisB.order() + 1) / 2);
    const GaussRule rule = gauss_legendre(points);
    std::vector<double> va(basisA.order()), vb(basisB.order());
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double mid = 0.5 * (cuts[seg] + cuts[seg + 1]);
        const double half = 0.5 * (cuts[seg + 1] - cuts[seg]);
        if (half <= 0.0) continue;
        for (int g = 0; g < points; ++g) {
            const double x = mid + half * rule.nodes[g];
            const double w = half * rule.weights[g];
            const int fa = basisA.evaluate_local(x, derivA, va.data());
            const int fb = basisB.evaluate_local(x, derivB, vb.data());
            for (int p = 0; p < basisA.order(); ++p)
                for (int q = 0; q < basisB.order(); ++q)
                    result(fa + p, fb + q) += w * va[p] * vb[q];
        }
    }
    return result;
}

}  // namespace adass
