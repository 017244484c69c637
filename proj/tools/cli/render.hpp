#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace polyforge::cli {

/// Indented JSON; invalid UTF-8 in echoed input is replaced.
std::string render_json(const nlohmann::json& payload);

/// Record lists (candidates, ranked, records) become one row per record;
/// anything else becomes `field,value` rows over the flattened scalars.
std::string render_csv(const nlohmann::json& payload);

/// Human-readable report: scalar fields, a property table with units and
/// range flags, and a compact table for record lists.
std::string render_table(const nlohmann::json& payload);

}  // namespace polyforge::cli
