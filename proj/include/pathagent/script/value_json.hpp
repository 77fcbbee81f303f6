#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pathagent/script/value.hpp"

namespace pathagent::script {

/// Converts a script value to JSON. Integer map keys become strings, tuples
/// become arrays. Callables and host objects raise ScriptFault(TypeError).
nlohmann::ordered_json to_json(const Value& v);

Value from_json(const nlohmann::ordered_json& j);
Value from_json(const nlohmann::json& j);

/// json.dumps() with Python's default separators and float rendering.
std::string python_json_dumps(const Value& v, std::optional<int> indent = std::nullopt,
                              bool sort_keys = false, bool ensure_ascii = true);

/// json.loads(); raises ScriptFault(JSONDecodeError).
Value python_json_loads(std::string_view text);

}  // namespace pathagent::script
