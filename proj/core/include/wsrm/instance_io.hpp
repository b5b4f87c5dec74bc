#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "wsrm/model.hpp"

namespace wsrm {

// Instance file schema: complex scalars are [re, im] pairs.
//   { "H": [ column_1, ..., column_K ],      column = [ [re,im] x M ]
//     "W": [ w_1, ..., w_K ],                optional, defaults to all ones
//     "constraints": [
//       { "kind": "sum-power", "gamma": P },  must come first
//       { "kind": "interference-direction", "c": [ [re,im] x M ], "gamma": g },
//       { "kind": "per-antenna", "antennas": [i, ...], "gamma": g },
//       { "kind": "general", "phi": [ row x M ], "gamma": g } ] }
// Errors are InputError with the offending field path in the message.
Instance instance_from_json(const nlohmann::json& doc);
nlohmann::json instance_to_json(const Instance& instance);
Instance load_instance(const std::filesystem::path& path);

nlohmann::json complex_vector_to_json(const CVector& v);
CVector complex_vector_from_json(const nlohmann::json& node, const std::string& field);

}  // namespace wsrm
