#pragma once

#include <optional>
#include <set>
#include <string>

#include "pathagent/script/interpreter.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::agent {

inline constexpr const char* kToolsHeader = "## Tools";
inline constexpr const char* kSpecialHeader = "## Special instructions";

/// General instructions, then the tool section (always present, possibly
/// empty), then the special instructions when non-empty.
std::string build_system_prompt(const std::string& general, const tools::Registry* registry,
                                const std::optional<std::set<tools::Category>>& categories,
                                const std::string& special, const std::string& extra_tool_docs = {});

/// Bundled prompt texts from the asset directory, with {allowed_imports}
/// and {forbidden_imports} filled from `limits`.
std::string default_general_instructions(const script::InterpreterLimits& limits);
std::string default_special_instructions(const script::InterpreterLimits& limits);

/// Docstring block for the stubbed web_search tool of the case-study preset.
std::string web_search_doc();

}  // namespace pathagent::agent
