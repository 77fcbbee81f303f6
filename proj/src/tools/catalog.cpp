#include "pathagent/tools/catalog.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "pathagent/script/value_json.hpp"
#include "pathagent/tools/geometry.hpp"

#ifndef PATHAGENT_ASSET_DIR
#define PATHAGENT_ASSET_DIR "assets"
#endif

namespace pathagent::tools {

namespace fs = std::filesystem;

fs::path asset_dir() {
  if (const char* env = std::getenv("PATHAGENT_ASSETS"); env && *env) return env;
  return PATHAGENT_ASSET_DIR;
}

std::vector<ToolDescriptor> load_catalog(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tool catalog: " + path.string());
  auto doc = nlohmann::ordered_json::parse(in);
  std::vector<ToolDescriptor> out;
  for (const auto& t : doc.at("tools")) {
    std::string name = t.value("name", "");
    try {
      ToolDescriptor d;
      d.name = t.at("name").get<std::string>();
      d.category = category_from_string(t.at("category").get<std::string>());
      d.description = t.at("description").get<std::string>();
      d.returns_type = t.value("returns_type", "dict");
      for (const auto& r : t.value("returns", nlohmann::ordered_json::array())) {
        d.returns.push_back(r.get<std::string>());
      }
      for (const auto& p : t.at("params")) {
        ParamSpec spec;
        spec.name = p.at("name").get<std::string>();
        spec.type = p.at("type").get<std::string>();
        spec.doc = p.at("doc").get<std::string>();
        if (p.contains("default")) {
          spec.required = false;
          spec.default_value = script::from_json(p.at("default"));
        }
        d.params.push_back(std::move(spec));
      }
      out.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw std::runtime_error("tool catalog entry '" + name + "': " + e.what());
    }
  }
  return out;
}

Registry build_registry(const std::vector<ToolDescriptor>& catalog,
                        std::shared_ptr<const FixtureStore> fixtures) {
  Registry reg;
  const auto& geometry = geometry_callables();
  for (const auto& d : catalog) {
    ToolBinding b;
    b.descriptor = d;
    if (auto it = geometry.find(d.name); it != geometry.end()) {
      b.callable = it->second;
    } else {
      if (fixtures) b.fixture_source = fixtures->fixtures_dir() / d.name;
      b.callable = [fixtures, d](const ArgMap& args, const ToolContext& ctx) -> script::Value {
        if (!fixtures) {
          throw ToolError(ToolErrorKind::FixtureMiss, "no fixture store configured for " + d.name);
        }
        return fixtures->lookup(d, args, ctx);
      };
    }
    reg.register_tool(std::move(b));
  }
  return reg;
}

Registry default_registry(const fs::path& dataset_root) {
  auto store = std::make_shared<FixtureStore>(dataset_root / "fixtures", dataset_root);
  return build_registry(load_catalog(asset_dir() / "tool_catalog.json"), store);
}

}  // namespace pathagent::tools
