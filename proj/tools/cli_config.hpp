#pragma once

#include <json.hpp>
#include <string>

#include "adass/simgen.hpp"
#include "adass/tuning.hpp"

namespace adass::cli {

using nlohmann::json;

/// Built-in defaults for one subcommand; config file and flags override.
json default_config(const std::string& command);

/// Recursive overlay: values in `overlay` win, objects merge key by key.
void merge(json& base, const json& overlay);

json load_config_file(const std::string& path);

/// Creates the output directory and returns it.
std::string prepare_out_dir(const json& cfg);

int resolve_threads(const json& cfg);

EstimatorSettings settings_from(const json& cfg);
GenConfig gen_config_from(const json& cfg);

/// The manifest is the fully resolved configuration; feeding it back through
/// --config reproduces the run.
void write_manifest(const json& cfg, const std::string& command, const std::string& dir);

}  // namespace adass::cli
