#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "adass/bspline.hpp"
#include "adass/core.hpp"

namespace adass {

/// A sample of curves observed on a common grid; row i of `values` holds
/// curve i. The grid must be strictly increasing with at least two points
/// contained in the domain.
struct FunctionalSample {
    Eigen::VectorXd grid;
    Eigen::MatrixXd values;
    Interval domain;

    FunctionalSample(Eigen::VectorXd grid, Eigen::MatrixXd values);
    FunctionalSample(Eigen::VectorXd grid, Eigen::MatrixXd values, Interval domain);

    Eigen::Index size() const { return values.rows(); }
};

/// Composite trapezoid weights for a strictly increasing grid.
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid);

struct CenterResult {
    FunctionalSample sample;
    Eigen::VectorXd mean;  // pointwise mean curve on the sample grid
};

/// Subtracts the pointwise sample mean; the returned mean curve is what a
/// held-out set must be centered with.
CenterResult center(const FunctionalSample& sample);

/// Subtracts a given mean curve (e.g. the training mean) from every row.
FunctionalSample subtract_mean(const FunctionalSample& sample, const Eigen::VectorXd& mean);

/// Row i = integral of curve_i(x) * psi(x) dx, by the trapezoid rule on the
/// observed grid.
Eigen::MatrixXd project(const FunctionalSample& sample, const BasisSystem& basis);

/// Sum over curves of the trapezoid integral of the squared curve.
double l2_norm_sq_sum(const FunctionalSample& sample);

/// Basis-projected regression data: X and Y hold one projected observation
/// per row; y_norm_sq is the constant term of the least-squares objective.
struct DesignMatrices {
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    double y_norm_sq = 0.0;
};

DesignMatrices make_design(const FunctionalSample& X, const FunctionalSample& Y,
                           const BasisSystem& basis_s, const BasisSystem& basis_t);

/// Long-format CSV column names (header row required, '.' decimal separator,
/// no quoting).
struct CsvColumns {
    std::string curve = "curve";
    std::string arg = "arg";
    std::string value = "value";
};

struct LabeledSample {
    FunctionalSample sample;
    std::vector<std::string> curve_ids;  // order of first appearance
};

LabeledSample load_csv(const std::string& path, const CsvColumns& columns = {});

void write_csv(const std::string& path, const FunctionalSample& sample,
               const std::vector<std::string>& curve_ids = {},
               const CsvColumns& columns = {});

}  // namespace adass
