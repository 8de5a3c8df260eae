#include "cli_config.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

namespace adass::cli {

json default_config(const std::string& command) {
    json cfg{
        {"seed", 0},
        {"out", "adass-out"},
        {"threads", 0},
    };
    const json basis{{"order", 4}, {"interior_knots", 20}, {"deriv_order", 2}};
    const json eaass{
        {"population_size", 20},
        {"truncation_fraction", 0.2},
        {"max_iterations", 15},
        {"perturb_factors", {1.2, 0.8}},
        {"lambda_range", {1e-8, 1e2}},
        {"gamma_range", {0.0, 4.0}},
        {"delta_star_range", {0.0, 0.1}},
    };
    const json tuning{
        {"cv_folds", 10},
        {"smooth_ladder", {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2}},
        {"ise_points", 201},
    };
    const json generation{
        {"scenario", "mexican_hat"}, {"n", 100},          {"test_n", 4000},
        {"s_points", 201},           {"t_points", 201},   {"sn_target", 4.0},
        {"x_basis_count", 32},       {"e_basis_count", 20},
    };
    if (command == "simulate") {
        merge(cfg, generation);
    } else if (command == "benchmark") {
        merge(cfg, generation);
        merge(cfg, tuning);
        cfg["basis"] = basis;
        cfg["eaass"] = eaass;
        cfg["replications"] = 10;
        cfg["estimators"] = {"SMOOTH", "AdaSS"};
    } else if (command == "fit" || command == "tune") {
        merge(cfg, tuning);
        cfg["basis"] = basis;
        cfg["eaass"] = eaass;
        cfg["x"] = "";
        cfg["y"] = "";
        cfg["method"] = "adass";
        cfg["slice_count"] = 5;
    } else if (command == "predict") {
        cfg["surface"] = "";
        cfg["x"] = "";
        cfg["mean_x"] = "";
        cfg["mean_y"] = "";
        cfg["t_points"] = 201;
    }
    return cfg;
}

void merge(json& base, const json& overlay) {
    if (!overlay.is_object()) {
        base = overlay;
        return;
    }
    if (!base.is_object()) base = json::object();
    for (const auto& [key, value] : overlay.items()) {
        if (value.is_object() && base.contains(key))
            merge(base[key], value);
        else
            base[key] = value;
    }
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("input-not-found", "cannot open config '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw Error("parse-error", "config '" + path + "': " + e.what());
    }
}

std::string prepare_out_dir(const json& cfg) {
    const std::string dir = cfg.at("out").get<std::string>();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error("output-failed", "cannot create output directory '" + dir + "'");
    return dir;
}

int resolve_threads(const json& cfg) {
    int t = cfg.value("threads", 0);
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(t, 1);
}

EstimatorSettings settings_from(const json& cfg) {
    EstimatorSettings s;
    const json& basis = cfg.at("basis");
    s.order_s = s.order_t = basis.at("order").get<int>();
    s.interior_s = s.interior_t = basis.at("interior_knots").get<int>();
    s.deriv_s = s.deriv_t = basis.at("deriv_order").get<int>();
    s.smooth_ladder = cfg.at("smooth_ladder").get<std::vector<double>>();
    s.cv_folds = cfg.at("cv_folds").get<int>();
    s.ise_points = cfg.at("ise_points").get<int>();

    const json& e = cfg.at("eaass");
    s.eaass.population_size = e.at("population_size").get<int>();
    s.eaass.truncation_fraction = e.at("truncation_fraction").get<double>();
    s.eaass.max_iterations = e.at("max_iterations").get<int>();
    s.eaass.perturb_factors = {e.at("perturb_factors").at(0).get<double>(),
                               e.at("perturb_factors").at(1).get<double>()};
    const auto interval = [](const json& pair) {
        return Interval{pair.at(0).get<double>(), pair.at(1).get<double>()};
    };
    s.eaass.ranges.lambda_s = s.eaass.ranges.lambda_t = interval(e.at("lambda_range"));
    s.eaass.ranges.gamma_s = s.eaass.ranges.gamma_t = interval(e.at("gamma_range"));
    s.eaass.ranges.delta_star_s = s.eaass.ranges.delta_star_t =
        interval(e.at("delta_star_range"));
    return s;
}

GenConfig gen_config_from(const json& cfg) {
    GenConfig g;
    g.n = cfg.at("n").get<int>();
    g.test_n = cfg.at("test_n").get<int>();
    g.s_points = cfg.at("s_points").get<int>();
    g.t_points = cfg.at("t_points").get<int>();
    g.sn_target = cfg.at("sn_target").get<double>();
    g.x_basis_count = cfg.at("x_basis_count").get<int>();
    g.e_basis_count = cfg.at("e_basis_count").get<int>();
    g.seed = cfg.at("seed").get<std::uint64_t>();
    return g;
}

void write_manifest(const json& cfg, const std::string& command, const std::string& dir) {
    json manifest = cfg;
    manifest["command"] = command;
    const std::string path = dir + "/manifest.json";
    std::ofstream out(path);
    if (!out)
        throw Error("output-failed", "cannot write '" + path + "'");
    out << manifest.dump(2) << '\n';
}

}  // namespace adass::cli
