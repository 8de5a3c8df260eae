#include "adass/estimator.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace adass {

CoefficientSurface::CoefficientSurface(BasisSystem bs, BasisSystem bt, Eigen::MatrixXd coeffs)
    : basis_s(std::move(bs)), basis_t(std::move(bt)), B(std::move(coeffs)) {
    if (B.rows() != basis_s.dimension() || B.cols() != basis_t.dimension())
        throw Error("invalid-surface", "coefficient matrix does not match the basis dimensions");
    if (!B.allFinite())
        throw Error("invalid-surface", "coefficient matrix must be finite");
}

double CoefficientSurface::evaluate(double s, double t, int deriv_s, int deriv_t) const {
    return basis_s.evaluate(s, deriv_s).dot(B * basis_t.evaluate(t, deriv_t));
}

Eigen::MatrixXd CoefficientSurface::evaluate_grid(const Eigen::VectorXd& s_grid,
                                                  const Eigen::VectorXd& t_grid) const {
    const Eigen::MatrixXd ps = basis_s.evaluate_points(s_grid, 0);
    const Eigen::MatrixXd pt = basis_t.evaluate_points(t_grid, 0);
    return ps * B * pt.transpose();
}

void TuningPoint::validate() const {
    if (!(lambda_s > 0.0) || !(lambda_t > 0.0))
        throw Error("invalid-weights", "lambda parameters must be positive");
    if (delta_star_s < 0.0 || delta_star_t < 0.0 || gamma_s < 0.0 || gamma_t < 0.0)
        throw Error("invalid-weights", "delta_star and gamma parameters must be non-negative");
}

PenaltySystem PenaltySystem::make(const BasisSystem& basis_s, const BasisSystem& basis_t,
                                  const SubIntervalGrid& grid_s, const SubIntervalGrid& grid_t,
                                  int deriv_s, int deriv_t) {
    if (deriv_s < 0 || deriv_s >= basis_s.order() || deriv_t < 0 || deriv_t >= basis_t.order())
        throw Error("unsupported-derivative", "penalty derivative order must lie in [0, order)");
    if (!same_interval(grid_s.span(), basis_s.domain()) ||
        !same_interval(grid_t.span(), basis_t.domain()))
        throw Error("domain-mismatch", "breakpoint grids must span the basis domains");

    PenaltySystem ps{basis_s, basis_t, grid_s, grid_t, deriv_s, deriv_t, {}, {}, {}, {}, {}, {}};
    const auto blocks = [](const BasisSystem& basis, const SubIntervalGrid& grid, int deriv,
                           std::vector<Eigen::MatrixXd>& W, std::vector<Eigen::MatrixXd>& R) {
        for (int i = 0; i + 1 < static_cast<int>(grid.breakpoints.size()); ++i) {
            const Interval cell{grid.breakpoints[i], grid.breakpoints[i + 1]};
            W.push_back(product_integral(basis, 0, basis, 0, cell));
            R.push_back(product_integral(basis, deriv, basis, deriv, cell));
        }
    };
    blocks(basis_s, grid_s, deriv_s, ps.W_s, ps.R_s);
    blocks(basis_t, grid_t, deriv_t, ps.W_t, ps.R_t);
    ps.weight_s = Eigen::MatrixXd::Ones(grid_s.interval_count(), grid_t.interval_count());
    ps.weight_t = ps.weight_s;
    return ps;
}

PenaltySystem PenaltySystem::make_global(const BasisSystem& basis_s, const BasisSystem& basis_t,
                                         int deriv_s, int deriv_t) {
    return make(basis_s, basis_t, SubIntervalGrid::uniform(basis_s.domain(), 0),
                SubIntervalGrid::uniform(basis_t.domain(), 0), deriv_s, deriv_t);
}

namespace {

Eigen::MatrixXd adaptive_weight_grid(const Eigen::MatrixXd& values, double gamma,
                                     double delta_star, const char* axis) {
    if (gamma == 0.0) return Eigen::MatrixXd::Ones(values.rows(), values.cols());
    const double peak = values.cwiseAbs().maxCoeff();
    double delta = 0.0;
    if (peak > 0.0)
        delta = delta_star * peak;
    else if (delta_star > 0.0)
        delta = delta_star;  // flat estimate: delta_star acts as an absolute offset
    else
        throw Error("invalid-weights", std::string("flat initial derivative estimate on the ") +
                                           axis + " axis with delta_star = 0");
    Eigen::MatrixXd w(values.rows(), values.cols());
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double base = std::abs(values(i, j)) + delta;
            if (base <= 0.0)
                throw Error("invalid-weights",
                            std::string("zero derivative estimate with delta = 0 on the ") + axis +
                                " axis");
            w(i, j) = std::pow(base, -gamma);
        }
    if (!w.allFinite())
        throw Error("invalid-weights", "adaptive weights are not finite");
    return w;
}

}  // namespace

void PenaltySystem::set_adaptive_weights(const Eigen::MatrixXd& deriv_values_s,
                                         const Eigen::MatrixXd& deriv_values_t,
                                         const TuningPoint& tuning) {
    tuning.validate();
    const Eigen::Index rows = grid_s.interval_count(), cols = grid_t.interval_count();
    if (deriv_values_s.rows() != rows || deriv_values_s.cols() != cols ||
        deriv_values_t.rows() != rows || deriv_values_t.cols() != cols)
        throw Error("invalid-weights", "derivative grids do not match the breakpoint rectangles");
    weight_s = adaptive_weight_grid(deriv_values_s, tuning.gamma_s, tuning.delta_star_s, "s");
    weight_t = adaptive_weight_grid(deriv_values_t, tuning.gamma_t, tuning.delta_star_t, "t");
}

Eigen::MatrixXd PenaltySystem::assemble(double lambda_s, double lambda_t) const {
    const Eigen::Index ds = basis_s.dimension(), dt = basis_t.dimension();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ds * dt, ds * dt);
    // Group the double block sum by t-interval: far fewer Kronecker products.
    for (std::size_t j = 0; j < W_t.size(); ++j) {
        Eigen::MatrixXd rs = Eigen::MatrixXd::Zero(ds, ds);
        Eigen::MatrixXd ws = Eigen::MatrixXd::Zero(ds, ds);
        for (std::size_t i = 0; i < W_s.size(); ++i) {
            rs += weight_s(i, j) * R_s[i];
            ws += weight_t(i, j) * W_s[i];
        }
        P += kronecker(W_t[j], lambda_s * rs);
        P += kronecker(R_t[j], lambda_t * ws);
    }
    return P;
}

Eigen::MatrixXd PenaltySystem::gram_t() const {
    Eigen::MatrixXd g = W_t.front();
    for (std::size_t j = 1; j < W_t.size(); ++j) g += W_t[j];
    return g;
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

namespace {

// Solves [gram_t x X'X + penalty] vec(B) = vec(X'Y) as an SPD system. On a
// failed factorization, one round of diagonal jitter is attempted.
Eigen::MatrixXd solve_normal_equations(const DesignMatrices& data, const Eigen::MatrixXd& gram_t,
                                       const Eigen::MatrixXd& penalty) {
    const Eigen::Index ds = data.X.cols(), dt = data.Y.cols();
    const Eigen::MatrixXd xtx = data.X.transpose() * data.X;
    const Eigen::MatrixXd xty = data.X.transpose() * data.Y;
    Eigen::MatrixXd A = kronecker(gram_t, xtx) + penalty;
    Eigen::Map<const Eigen::VectorXd> rhs(xty.data(), ds * dt);
    if (!A.allFinite() || !rhs.allFinite())
        throw Error("singular-system", "normal equations contain non-finite entries");
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        A.diagonal().array() += 1e-10 * A.diagonal().mean();
        llt.compute(A);
        if (llt.info() != Eigen::Success)
            throw Error("singular-system",
                        "normal equations are not positive definite, even after jitter");
    }
    const Eigen::VectorXd b = llt.solve(rhs);
    if (!b.allFinite())
        throw Error("singular-system", "solver produced non-finite coefficients");
    return Eigen::Map<const Eigen::MatrixXd>(b.data(), ds, dt);
}

void check_design(const DesignMatrices& data, const BasisSystem& basis_s,
                  const BasisSystem& basis_t) {
    if (data.X.rows() == 0)
        throw Error("empty-sample", "cannot fit on an empty sample");
    if (data.X.rows() != data.Y.rows())
        throw Error("domain-mismatch", "X and Y hold different numbers of observations");
    if (data.X.cols() != basis_s.dimension() || data.Y.cols() != basis_t.dimension())
        throw Error("domain-mismatch", "design matrices do not match the basis dimensions");
}

}  // namespace

CoefficientSurface fit_smooth(const DesignMatrices& data, const BasisSystem& basis_s,
                              const BasisSystem& basis_t, double lambda_s, double lambda_t,
                              int deriv_s, int deriv_t) {
    check_design(data, basis_s, basis_t);
    if (!(lambda_s > 0.0) || !(lambda_t > 0.0))
        throw Error("invalid-weights", "roughness parameters must be positive");
    const PenaltySystem global = PenaltySystem::make_global(basis_s, basis_t, deriv_s, deriv_t);
    const Eigen::MatrixXd penalty = global.assemble(lambda_s, lambda_t);
    return {basis_s, basis_t, solve_normal_equations(data, global.gram_t(), penalty)};
}

CoefficientSurface fit_adass(const DesignMatrices& data, const PenaltySystem& penalty,
                             const TuningPoint& tuning) {
    check_design(data, penalty.basis_s, penalty.basis_t);
    tuning.validate();
    if (!penalty.weight_s.allFinite() || !penalty.weight_t.allFinite() ||
        (penalty.weight_s.array() <= 0.0).any() || (penalty.weight_t.array() <= 0.0).any())
        throw Error("invalid-weights", "penalty weights must be positive and finite");
    const Eigen::MatrixXd P = penalty.assemble(tuning.lambda_s, tuning.lambda_t);
    return {penalty.basis_s, penalty.basis_t,
            solve_normal_equations(data, penalty.gram_t(), P)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> initial_derivatives(const CoefficientSurface& surface,
                                                                int deriv_s, int deriv_t,
                                                                const SubIntervalGrid& grid_s,
                                                                const SubIntervalGrid& grid_t) {
    // Right-endpoint evaluation: tau_1 .. tau_{L+1} on each axis.
    const int ls = grid_s.interval_count(), lt = grid_t.interval_count();
    Eigen::VectorXd s_pts(ls), t_pts(lt);
    for (int i = 0; i < ls; ++i) s_pts[i] = grid_s.breakpoints[i + 1];
    for (int j = 0; j < lt; ++j) t_pts[j] = grid_t.breakpoints[j + 1];
    const Eigen::MatrixXd ps0 = surface.basis_s.evaluate_points(s_pts, 0);
    const Eigen::MatrixXd psm = surface.basis_s.evaluate_points(s_pts, deriv_s);
    const Eigen::MatrixXd pt0 = surface.basis_t.evaluate_points(t_pts, 0);
    const Eigen::MatrixXd ptm = surface.basis_t.evaluate_points(t_pts, deriv_t);
    return {psm * surface.B * pt0.transpose(), ps0 * surface.B * ptm.transpose()};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> finite_difference_derivatives(
    const std::function<double(double, double)>& f, int deriv_s, int deriv_t,
    const SubIntervalGrid& grid_s, const SubIntervalGrid& grid_t, double step) {
    const auto central = [step](const std::function<double(double)>& g, int m) {
        // m-th order central difference with binomial weights.
        double acc = 0.0;
        double binom = 1.0;
        for (int r = 0; r <= m; ++r) {
            const double offset = (0.5 * m - r) * step;
            acc += (r % 2 == 0 ? binom : -binom) * g(offset);
            binom = binom * (m - r) / (r + 1);
        }
        return acc / std::pow(step, m);
    };
    const int ls = grid_s.interval_count(), lt = grid_t.interval_count();
    Eigen::MatrixXd d_s(ls, lt), d_t(ls, lt);
    for (int i = 0; i < ls; ++i) {
        const double s = grid_s.breakpoints[i + 1];
        for (int j = 0; j < lt; ++j) {
            const double t = grid_t.breakpoints[j + 1];
            d_s(i, j) = central([&](double h) { return f(s + h, t); }, deriv_s);
            d_t(i, j) = central([&](double h) { return f(s, t + h); }, deriv_t);
        }
    }
    return {d_s, d_t};
}

Eigen::MatrixXd predict(const CoefficientSurface& surface, const FunctionalSample& X_new,
                        const Eigen::VectorXd& t_grid) {
    const Eigen::MatrixXd proj = project(X_new, surface.basis_s);
    const Eigen::MatrixXd pt = surface.basis_t.evaluate_points(t_grid, 0);
    return proj * surface.B * pt.transpose();
}

double ise(const CoefficientSurface& surface, const std::function<double(double, double)>& beta_true,
           int s_points, int t_points) {
    const Interval ds = surface.basis_s.domain(), dt = surface.basis_t.domain();
    Eigen::VectorXd s_grid = Eigen::VectorXd::LinSpaced(s_points, ds.lo, ds.hi);
    Eigen::VectorXd t_grid = Eigen::VectorXd::LinSpaced(t_points, dt.lo, dt.hi);
    const Eigen::MatrixXd fitted = surface.evaluate_grid(s_grid, t_grid);
    Eigen::MatrixXd diff(s_points, t_points);
    for (int i = 0; i < s_points; ++i)
        for (int j = 0; j < t_points; ++j)
            diff(i, j) = fitted(i, j) - beta_true(s_grid[i], t_grid[j]);
    const Eigen::VectorXd ws = trapezoid_weights(s_grid);
    const Eigen::VectorXd wt = trapezoid_weights(t_grid);
    const double integral = ws.dot(diff.array().square().matrix() * wt);
    return integral / (ds.length() * dt.length());
}

double pmse(const CoefficientSurface& surface, const FunctionalSample& X_test,
            const FunctionalSample& Y_test) {
    if (X_test.size() == 0 || Y_test.size() == 0)
        throw Error("empty-sample", "prediction error needs a non-empty test set");
    if (X_test.size() != Y_test.size())
        throw Error("domain-mismatch", "test predictor and response sizes differ");
    const Eigen::MatrixXd pred = predict(surface, X_test, Y_test.grid);
    const Eigen::MatrixXd resid = Y_test.values - pred;
    const Eigen::VectorXd wt = trapezoid_weights(Y_test.grid);
    return (resid.array().square().matrix() * wt).sum() / Y_test.size();
}

double objective_value(const DesignMatrices& data, const Eigen::MatrixXd& gram_t,
                       const Eigen::MatrixXd& penalty, const Eigen::MatrixXd& B) {
    const Eigen::MatrixXd xty = data.X.transpose() * data.Y;
    const Eigen::MatrixXd xtx = data.X.transpose() * data.X;
    const double sse = data.y_norm_sq - 2.0 * (xty.array() * B.array()).sum() +
                       (xtx * B * gram_t * B.transpose()).trace();
    Eigen::Map<const Eigen::VectorXd> b(B.data(), B.size());
    return sse + b.dot(penalty * b);
}

void save_surface(const CoefficientSurface& surface, const std::string& path) {
    nlohmann::json j;
    const auto basis_json = [](const BasisSystem& basis) {
        return nlohmann::json{{"order", basis.order()},
                              {"interior_knots", basis.interior_knots()},
                              {"domain", {basis.domain().lo, basis.domain().hi}}};
    };
    j["basis_s"] = basis_json(surface.basis_s);
    j["basis_t"] = basis_json(surface.basis_t);
    auto& rows = j["coefficients"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < surface.B.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < surface.B.cols(); ++k) row.push_back(surface.B(i, k));
        rows.push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out)
        throw Error("output-failed", "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

CoefficientSurface load_surface(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("input-not-found", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse-error", "'" + path + "': " + e.what());
    }
    const auto basis_from = [&](const char* key) {
        const auto& b = j.at(key);
        return BasisSystem(b.at("order").get<int>(), b.at("interior_knots").get<int>(),
                           {b.at("domain").at(0).get<double>(), b.at("domain").at(1).get<double>()});
    };
    try {
        BasisSystem bs = basis_from("basis_s");
        BasisSystem bt = basis_from("basis_t");
        const auto& rows = j.at("coefficients");
        Eigen::MatrixXd B(rows.size(), rows.empty() ? 0 : rows.at(0).size());
        for (Eigen::Index i = 0; i < B.rows(); ++i)
            for (Eigen::Index k = 0; k < B.cols(); ++k)
                B(i, k) = rows.at(i).at(k).get<double>();
        return {std::move(bs), std::move(bt), std::move(B)};
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse-error", "'" + path + "': " + e.what());
    }
}

}  // namespace adass
