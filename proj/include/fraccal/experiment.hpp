#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

#include "fraccal/errors.hpp"

namespace fraccal {

// Configuration-driven experiment front end. A config is one flat JSON
// object; unknown keys are rejected, and every value is validated against
// the preconditions of the targeted operation before heavy computation.

// Defaults for a subcommand (a complete, runnable config).
nlohmann::json default_config(const std::string& subcommand);

// Defaults overlaid with the user config; throws ConfigError on unknown or
// ill-typed keys.
nlohmann::json resolve_config(const std::string& subcommand, const nlohmann::json& user);

// Executes one experiment; writes <out>/record.json, metric CSV tables and
// (optionally) SVG charts. Throws fraccal::Error on failure.
void run_experiment(const std::string& subcommand, const nlohmann::json& config,
                    const std::string& outdir, bool plot);

// Dry-run precondition ledger; returns the number of violations and prints
// one line per item to `out`.
int validate_config(const nlohmann::json& config, std::ostream& out);

// Exit-code policy: 1 config error, 2 numerical precondition failure,
// 3 internal tolerance breach.
int exit_code_for(ErrorCode code);

// Full command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace fraccal
