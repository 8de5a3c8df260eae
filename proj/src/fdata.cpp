#include "adass/fdata.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace adass {

namespace {

void validate_sample(const Eigen::VectorXd& grid, const Eigen::MatrixXd& values,
                     const Interval& domain) {
    if (grid.size() < 2)
        throw Error("invalid-grid", "a functional sample needs at least two grid points");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
        if (!(grid[i - 1] < grid[i]))
            throw Error("invalid-grid", "sampling grid must be strictly increasing");
    if (values.cols() != grid.size())
        throw Error("invalid-grid", "value columns must match the grid length");
    if (!values.allFinite())
        throw Error("invalid-grid", "curve values must be finite");
    const double tol = 1e-12 * std::max(1.0, std::abs(domain.length()));
    if (grid[0] < domain.lo - tol || grid[grid.size() - 1] > domain.hi + tol)
        throw Error("invalid-grid", "grid points must lie in the sample domain");
}

}  // namespace

FunctionalSample::FunctionalSample(Eigen::VectorXd g, Eigen::MatrixXd v)
    : grid(std::move(g)), values(std::move(v)), domain{0.0, 1.0} {
    if (grid.size() >= 2) domain = {grid[0], grid[grid.size() - 1]};
    validate_sample(grid, values, domain);
}

FunctionalSample::FunctionalSample(Eigen::VectorXd g, Eigen::MatrixXd v, Interval dom)
    : grid(std::move(g)), values(std::move(v)), domain(dom) {
    validate_sample(grid, values, domain);
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.size());
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
        const double h = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

CenterResult center(const FunctionalSample& sample) {
    if (sample.size() == 0)
        throw Error("empty-sample", "cannot center an empty sample");
    Eigen::VectorXd mean = sample.values.colwise().mean();
    return {subtract_mean(sample, mean), std::move(mean)};
}

FunctionalSample subtract_mean(const FunctionalSample& sample, const Eigen::VectorXd& mean) {
    if (mean.size() != sample.grid.size())
        throw Error("domain-mismatch", "mean curve grid does not match the sample grid");
    Eigen::MatrixXd centered = sample.values.rowwise() - mean.transpose();
    return {sample.grid, std::move(centered), sample.domain};
}

Eigen::MatrixXd project(const FunctionalSample& sample, const BasisSystem& basis) {
    if (!same_interval(sample.domain, basis.domain()))
        throw Error("domain-mismatch", "sample domain does not match the basis domain");
    // Trapezoid on the grid, with the basis taken as its within-panel
    // one-sided limits; identical to the plain rule for continuous bases and
    // exact at the jumps of order-1 bases.
    const Eigen::Index points = sample.grid.size();
    Eigen::VectorXd w_right = Eigen::VectorXd::Zero(points);  // panel to the right
    Eigen::VectorXd w_left = Eigen::VectorXd::Zero(points);   // panel to the left
    for (Eigen::Index g = 0; g + 1 < points; ++g) {
        const double h = 0.5 * (sample.grid[g + 1] - sample.grid[g]);
        w_right[g] += h;
        w_left[g + 1] += h;
    }
    std::vector<double> local(basis.order());
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(points, basis.dimension());
    for (Eigen::Index g = 0; g < points; ++g) {
        int first = basis.evaluate_local(sample.grid[g], 0, local.data(), false);
        for (int j = 0; j < basis.order(); ++j) psi(g, first + j) += w_right[g] * local[j];
        first = basis.evaluate_local(sample.grid[g], 0, local.data(), true);
        for (int j = 0; j < basis.order(); ++j) psi(g, first + j) += w_left[g] * local[j];
    }
    return sample.values * psi;
}

double l2_norm_sq_sum(const FunctionalSample& sample) {
    const Eigen::VectorXd w = trapezoid_weights(sample.grid);
    return (sample.values.array().square().matrix() * w).sum();
}

DesignMatrices make_design(const FunctionalSample& X, const FunctionalSample& Y,
                           const BasisSystem& basis_s, const BasisSystem& basis_t) {
    if (X.size() != Y.size())
        throw Error("domain-mismatch", "predictor and response samples differ in size");
    return {project(X, basis_s), project(Y, basis_t), l2_norm_sq_sum(Y)};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw Error("parse-error",
                    "non-numeric cell '" + text + "' at line " + std::to_string(line_no));
    return v;
}

}  // namespace

LabeledSample load_csv(const std::string& path, const CsvColumns& columns) {
    std::ifstream in(path);
    if (!in)
        throw Error("input-not-found", "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw Error("parse-error", "'" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_line(line);
    int curve_col = -1, arg_col = -1, value_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == columns.curve) curve_col = static_cast<int>(i);
        if (header[i] == columns.arg) arg_col = static_cast<int>(i);
        if (header[i] == columns.value) value_col = static_cast<int>(i);
    }
    if (curve_col < 0 || arg_col < 0 || value_col < 0)
        throw Error("parse-error", "'" + path + "' is missing one of the columns '" +
                                       columns.curve + "', '" + columns.arg + "', '" +
                                       columns.value + "'");

    std::vector<std::string> ids;
    std::map<std::string, std::size_t> id_index;
    std::vector<std::vector<double>> args, vals;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            throw Error("parse-error", "wrong field count at line " + std::to_string(line_no));
        const std::string& id = fields[curve_col];
        auto [it, inserted] = id_index.try_emplace(id, ids.size());
        if (inserted) {
            ids.push_back(id);
            args.emplace_back();
            vals.emplace_back();
        }
        args[it->second].push_back(parse_double(fields[arg_col], line_no));
        vals[it->second].push_back(parse_double(fields[value_col], line_no));
    }
    if (ids.empty())
        throw Error("empty-sample", "'" + path + "' contains no curves");

    const std::vector<double>& ref = args[0];
    for (std::size_t c = 1; c < ids.size(); ++c)
        if (args[c] != ref)
            throw Error("inconsistent-grid",
                        "curve '" + ids[c] + "' does not share the grid of curve '" + ids[0] + "'");

    Eigen::VectorXd grid = Eigen::Map<const Eigen::VectorXd>(ref.data(), ref.size());
    Eigen::MatrixXd values(ids.size(), ref.size());
    for (std::size_t c = 0; c < ids.size(); ++c)
        values.row(c) = Eigen::Map<const Eigen::VectorXd>(vals[c].data(), vals[c].size());
    return {FunctionalSample(std::move(grid), std::move(values)), std::move(ids)};
}

void write_csv(const std::string& path, const FunctionalSample& sample,
               const std::vector<std::string>& curve_ids, const CsvColumns& columns) {
    if (!curve_ids.empty() && static_cast<Eigen::Index>(curve_ids.size()) != sample.size())
        throw Error("invalid-grid", "curve id count does not match the sample size");
    std::ofstream out(path);
    if (!out)
        throw Error("output-failed", "cannot write '" + path + "'");
    out << columns.curve << ',' << columns.arg << ',' << columns.value << '\n';
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        const std::string id = curve_ids.empty() ? std::to_string(i) : curve_ids[i];
        for (Eigen::Index g = 0; g < sample.grid.size(); ++g)
            out << id << ',' << format_number(sample.grid[g]) << ','
                << format_number(sample.values(i, g)) << '\n';
    }
    if (!out)
        throw Error("output-failed", "failed while writing '" + path + "'");
}

}  // namespace adass
