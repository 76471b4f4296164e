#pragma once

#include <string>

#include "json.hpp"

namespace quakescan::pipeline {

// Command-level entry points. Each takes a flat-key JSON config, performs
// the file I/O, and returns a summary document. Unknown config keys are
// rejected. These back the C API's qs_run_* functions and the CLI
// subcommands one to one.

nlohmann::json run_synth(const nlohmann::json& config);
nlohmann::json run_extract(const nlohmann::json& config);
nlohmann::json run_rank(const nlohmann::json& config);
nlohmann::json run_train(const nlohmann::json& config);
nlohmann::json run_scan(const nlohmann::json& config);
nlohmann::json run_eval(const nlohmann::json& config);

// Dispatch by subcommand name.
nlohmann::json run_command(const std::string& command, const nlohmann::json& config);

}  // namespace quakescan::pipeline
