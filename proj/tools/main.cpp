#include <CLI11.hpp>
#include <iostream>

#include "cli_commands.hpp"
#include "cli_config.hpp"

namespace {

using adass::cli::json;

struct PendingOverrides {
    json values;
    std::string config_path;
};

// Flags are collected per subcommand and applied over defaults + config file
// after parsing, so a flag always wins regardless of argument order.
void add_common(CLI::App* cmd, PendingOverrides& pending) {
    cmd->add_option_function<std::string>(
        "--config", [&pending](const std::string& v) { pending.config_path = v; },
        "JSON config file; flags override its values");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&pending](std::uint64_t v) { pending.values["seed"] = v; }, "global seed");
    cmd->add_option_function<std::string>(
        "--out", [&pending](const std::string& v) { pending.values["out"] = v; },
        "output directory");
    cmd->add_option_function<int>(
        "--threads", [&pending](int v) { pending.values["threads"] = v; },
        "worker threads (0 = auto)");
}

void add_generation(CLI::App* cmd, PendingOverrides& pending) {
    const auto opt_int = [&](const char* flag, const char* key, const char* help) {
        cmd->add_option_function<int>(
            flag, [&pending, key](int v) { pending.values[key] = v; }, help);
    };
    cmd->add_option_function<std::string>(
        "--scenario",
        [&pending](const std::string& v) { pending.values["scenario"] = v; },
        "mexican_hat | dampened_harmonic | rapid_change");
    opt_int("--n", "n", "training sample size");
    opt_int("--test-n", "test_n", "test sample size");
    opt_int("--s-points", "s_points", "predictor grid size");
    opt_int("--t-points", "t_points", "response grid size");
    opt_int("--x-basis", "x_basis_count", "covariate spline basis size");
    opt_int("--e-basis", "e_basis_count", "error spline basis size");
    cmd->add_option_function<double>(
        "--sn", [&pending](double v) { pending.values["sn_target"] = v; },
        "signal-to-noise target");
}

void add_estimation(CLI::App* cmd, PendingOverrides& pending) {
    const auto opt_int = [&](const char* flag, const json::json_pointer& ptr, const char* help) {
        cmd->add_option_function<int>(
            flag, [&pending, ptr](int v) { pending.values[ptr] = v; }, help);
    };
    opt_int("--order", json::json_pointer("/basis/order"), "B-spline order (both axes)");
    opt_int("--interior-knots", json::json_pointer("/basis/interior_knots"),
            "interior knots per axis");
    opt_int("--deriv-order", json::json_pointer("/basis/deriv_order"),
            "roughness derivative order");
    opt_int("--cv-folds", json::json_pointer("/cv_folds"), "cross validation folds");
    opt_int("--ise-points", json::json_pointer("/ise_points"), "metric grid points per axis");
    opt_int("--population", json::json_pointer("/eaass/population_size"),
            "evolutionary population size");
    opt_int("--iterations", json::json_pointer("/eaass/max_iterations"),
            "evolutionary iterations");
    cmd->add_option_function<double>(
        "--truncation",
        [&pending](double v) { pending.values[json::json_pointer("/eaass/truncation_fraction")] = v; },
        "share of the population replaced per iteration");
}

void add_tuning_values(CLI::App* cmd, PendingOverrides& pending) {
    const auto opt = [&](const char* flag, const char* key, const char* help) {
        cmd->add_option_function<double>(
            flag, [&pending, key](double v) { pending.values[key] = v; }, help);
    };
    opt("--lambda-s", "lambda_s", "fix lambda_s");
    opt("--lambda-t", "lambda_t", "fix lambda_t");
    opt("--gamma-s", "gamma_s", "fix gamma_s");
    opt("--gamma-t", "gamma_t", "fix gamma_t");
    opt("--delta-star-s", "delta_star_s", "fix delta_star_s");
    opt("--delta-star-t", "delta_star_t", "fix delta_star_t");
}

json resolve(const std::string& command, const PendingOverrides& pending) {
    json cfg = adass::cli::default_config(command);
    if (!pending.config_path.empty())
        adass::cli::merge(cfg, adass::cli::load_config_file(pending.config_path));
    adass::cli::merge(cfg, pending.values);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive smoothing spline estimation for function-on-function regression"};
    app.require_subcommand(1);

    PendingOverrides simulate_pending, fit_pending, predict_pending, tune_pending,
        benchmark_pending;

    CLI::App* simulate = app.add_subcommand("simulate", "generate a simulated dataset");
    add_common(simulate, simulate_pending);
    add_generation(simulate, simulate_pending);

    CLI::App* fit = app.add_subcommand("fit", "fit a coefficient surface from CSV data");
    add_common(fit, fit_pending);
    add_estimation(fit, fit_pending);
    add_tuning_values(fit, fit_pending);
    fit->add_option_function<std::string>(
        "--x", [&fit_pending](const std::string& v) { fit_pending.values["x"] = v; },
        "predictor curves CSV");
    fit->add_option_function<std::string>(
        "--y", [&fit_pending](const std::string& v) { fit_pending.values["y"] = v; },
        "response curves CSV");
    fit->add_option_function<std::string>(
        "--method", [&fit_pending](const std::string& v) { fit_pending.values["method"] = v; },
        "smooth | adass");
    fit->add_option_function<int>(
        "--slices", [&fit_pending](int v) { fit_pending.values["slice_count"] = v; },
        "response-side slices exported for plotting");

    CLI::App* predict = app.add_subcommand("predict", "predict responses for new curves");
    add_common(predict, predict_pending);
    predict->add_option_function<std::string>(
        "--surface",
        [&predict_pending](const std::string& v) { predict_pending.values["surface"] = v; },
        "fitted surface JSON");
    predict->add_option_function<std::string>(
        "--x", [&predict_pending](const std::string& v) { predict_pending.values["x"] = v; },
        "predictor curves CSV");
    predict->add_option_function<std::string>(
        "--mean-x",
        [&predict_pending](const std::string& v) { predict_pending.values["mean_x"] = v; },
        "training mean predictor curve CSV");
    predict->add_option_function<std::string>(
        "--mean-y",
        [&predict_pending](const std::string& v) { predict_pending.values["mean_y"] = v; },
        "training mean response curve CSV");
    predict->add_option_function<int>(
        "--t-points",
        [&predict_pending](int v) { predict_pending.values["t_points"] = v; },
        "prediction grid size");

    CLI::App* tune = app.add_subcommand("tune", "search tuning parameters without fitting output");
    add_common(tune, tune_pending);
    add_estimation(tune, tune_pending);
    add_tuning_values(tune, tune_pending);
    tune->add_option_function<std::string>(
        "--x", [&tune_pending](const std::string& v) { tune_pending.values["x"] = v; },
        "predictor curves CSV");
    tune->add_option_function<std::string>(
        "--y", [&tune_pending](const std::string& v) { tune_pending.values["y"] = v; },
        "response curves CSV");
    tune->add_option_function<std::string>(
        "--method", [&tune_pending](const std::string& v) { tune_pending.values["method"] = v; },
        "smooth | adass");

    CLI::App* benchmark = app.add_subcommand("benchmark", "run the Monte Carlo study");
    add_common(benchmark, benchmark_pending);
    add_generation(benchmark, benchmark_pending);
    add_estimation(benchmark, benchmark_pending);
    benchmark->add_option_function<int>(
        "--replications",
        [&benchmark_pending](int v) { benchmark_pending.values["replications"] = v; },
        "Monte Carlo replications");
    benchmark->add_option_function<std::string>(
        "--estimators",
        [&benchmark_pending](const std::string& v) {
            json list = json::array();
            std::string token;
            for (char c : v + ",") {
                if (c == ',') {
                    if (!token.empty()) list.push_back(token);
                    token.clear();
                } else {
                    token += c;
                }
            }
            benchmark_pending.values["estimators"] = list;
        },
        "comma separated subset of SMOOTH,AdaSS,AdaSStrue");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) adass::cli::run_simulate(resolve("simulate", simulate_pending));
        if (fit->parsed()) adass::cli::run_fit(resolve("fit", fit_pending));
        if (predict->parsed()) adass::cli::run_predict(resolve("predict", predict_pending));
        if (tune->parsed()) adass::cli::run_tune(resolve("tune", tune_pending));
        if (benchmark->parsed()) adass::cli::run_benchmark(resolve("benchmark", benchmark_pending));
    } catch (const adass::Error& e) {
        std::cerr << "ERROR " << e.code() << ": " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR internal: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
