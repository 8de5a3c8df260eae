#pragma once

#include "cli_config.hpp"

namespace adass::cli {

void run_simulate(const json& cfg);
void run_fit(const json& cfg);
void run_predict(const json& cfg);
void run_tune(const json& cfg);
void run_benchmark(const json& cfg);

}  // namespace adass::cli
