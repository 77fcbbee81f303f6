#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "pathagent/tools/fixture_store.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::tools {

/// Directory holding tool_catalog.json and the prompt texts. The
/// PATHAGENT_ASSETS environment variable overrides the built-in location.
std::filesystem::path asset_dir();

/// Reads tool descriptors from a catalog file. Throws std::runtime_error
/// naming the offending entry on malformed input.
std::vector<ToolDescriptor> load_catalog(const std::filesystem::path& path);

/// Registers every descriptor in order. Geometry tools get their real
/// implementations; all others answer from `fixtures` (FixtureMiss when it
/// is null or has no record).
Registry build_registry(const std::vector<ToolDescriptor>& catalog,
                        std::shared_ptr<const FixtureStore> fixtures);

/// The bundled catalog with fixtures for `dataset_root`, which is expected
/// to contain a fixtures/ directory.
Registry default_registry(const std::filesystem::path& dataset_root);

}  // namespace pathagent::tools
