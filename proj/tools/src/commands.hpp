#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "manifest.hpp"

namespace wsrm::cli {

// Resolved settings are plain JSON objects: defaults, overlaid by a config
// file, overlaid by explicit flags. Unknown keys are rejected.
nlohmann::json solve_defaults();
nlohmann::json cdf_defaults();
nlohmann::json cellsim_defaults();

// Overlays `layer` onto `base`, rejecting keys absent from base; `origin`
// names the layer in error messages.
void overlay(nlohmann::json& base, const nlohmann::json& layer, const std::string& origin);
nlohmann::json load_config_file(const std::string& path);

// Default worker count: WSRM_JOBS when set and positive, otherwise 1.
unsigned default_jobs();

/// Solves one instance file. Writes the report JSON to settings["out"] (or
/// `out` when empty) and the convergence CSV to settings["trace"] if set.
nlohmann::json run_solve(const nlohmann::json& settings, std::ostream& out);

/// Two-step versus gradient CDF experiment; CSV rows ordered by seed.
nlohmann::json run_cdf(const nlohmann::json& settings, std::ostream& out);

/// Two-cell simulation; per-user CSV plus a JSON summary.
nlohmann::json run_cellsim(const nlohmann::json& settings, std::ostream& out);

}  // namespace wsrm::cli
