#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathagent/script/value.hpp"
#include "pathagent/tools/registry.hpp"

namespace pathagent::tools {

/// Recorded outputs for the tools that need pretrained models. Records live
/// in <fixtures_dir>/<tool_name>/*.json, each a JSON array of
/// {"args": {...}, "result": ...}.
///
/// Lookup key: the call's arguments with defaults dropped, path-like strings
/// rewritten as "{dataset}/rel" or "{working_dir}/rel", serialized with
/// sorted keys. Strings in results have the same two tokens expanded.
class FixtureStore {
 public:
  FixtureStore(std::filesystem::path fixtures_dir, std::filesystem::path dataset_root);

  /// Throws FixtureMiss when no record matches.
  script::Value lookup(const ToolDescriptor& tool, const ArgMap& args,
                       const ToolContext& ctx) const;

  /// The canonical key for a call, exposed for tests and fixture authoring.
  std::string canonical_key(const ToolDescriptor& tool, const ArgMap& args,
                            const ToolContext& ctx) const;

  const std::filesystem::path& fixtures_dir() const { return fixtures_dir_; }
  const std::filesystem::path& dataset_root() const { return dataset_root_; }

 private:
  using Records = std::map<std::string, nlohmann::ordered_json>;
  const Records& records_for(const ToolDescriptor& tool) const;
  nlohmann::json canonical_value(const script::Value& v, const ToolContext& ctx) const;

  std::filesystem::path fixtures_dir_;
  std::filesystem::path dataset_root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, Records> cache_;
};

}  // namespace pathagent::tools
