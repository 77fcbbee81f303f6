#include "pathagent/tools/fixture_store.hpp"

#include <algorithm>
#include <fstream>

#include "pathagent/script/modules.hpp"
#include "pathagent/script/sandbox.hpp"
#include "pathagent/script/value_json.hpp"

namespace pathagent::tools {

namespace fs = std::filesystem;
using script::Value;

namespace {

constexpr std::string_view kDatasetToken = "{dataset}";
constexpr std::string_view kWorkdirToken = "{working_dir}";

std::string relative_token(std::string_view token, const fs::path& p, const fs::path& root) {
  fs::path rel = p.lexically_relative(root);
  std::string r = rel.generic_string();
  if (r == ".") return std::string(token);
  return std::string(token) + "/" + r;
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

void expand_tokens(nlohmann::ordered_json& j, const std::string& dataset, const std::string& workdir) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    replace_all(s, kDatasetToken, dataset);
    replace_all(s, kWorkdirToken, workdir);
    j = s;
  } else if (j.is_array() || j.is_object()) {
    for (auto& e : j) expand_tokens(e, dataset, workdir);
  }
}

}  // namespace

FixtureStore::FixtureStore(fs::path fixtures_dir, fs::path dataset_root)
    : fixtures_dir_(std::move(fixtures_dir)),
      dataset_root_(fs::absolute(std::move(dataset_root)).lexically_normal()) {}

nlohmann::json FixtureStore::canonical_value(const Value& v, const ToolContext& ctx) const {
  std::optional<std::string> s;
  if (v.is_str()) s = v.as_str();
  if (auto p = script::path_string(v)) s = *p;
  if (s) {
    bool path_like = !s->empty() && (s->front() == '/' || s->find('/') != std::string::npos);
    if (!path_like || s->front() == '{') return *s;
    fs::path abs = fs::path(*s).is_absolute() ? fs::path(*s) : fs::absolute(ctx.working_dir) / *s;
    abs = abs.lexically_normal();
    if (!abs.has_filename()) abs = abs.parent_path();
    if (script::path_within(abs, dataset_root_)) return relative_token(kDatasetToken, abs, dataset_root_);
    if (!ctx.working_dir.empty()) {
      fs::path wd = fs::absolute(ctx.working_dir).lexically_normal();
      if (script::path_within(abs, wd)) return relative_token(kWorkdirToken, abs, wd);
    }
    return *s;
  }
  if (v.is_list() || v.is_tuple()) {
    auto arr = nlohmann::json::array();
    for (const auto& e : v.is_list() ? v.as_list().items : v.as_tuple().items) {
      arr.push_back(canonical_value(e, ctx));
    }
    return arr;
  }
  if (v.is_dict()) {
    auto obj = nlohmann::json::object();
    for (const auto& [k, e] : v.as_dict().entries()) obj[script::str(k)] = canonical_value(e, ctx);
    return obj;
  }
  return nlohmann::json::parse(script::to_json(v).dump());
}

std::string FixtureStore::canonical_key(const ToolDescriptor& tool, const ArgMap& args,
                                        const ToolContext& ctx) const {
  auto obj = nlohmann::json::object();  // std::map ordering sorts keys
  for (const auto& p : tool.params) {
    auto it = args.find(p.name);
    if (it == args.end()) continue;
    if (p.default_value && script::equals(it->second, *p.default_value)) continue;
    obj[p.name] = canonical_value(it->second, ctx);
  }
  return obj.dump();
}

const FixtureStore::Records& FixtureStore::records_for(const ToolDescriptor& tool) const {
  std::lock_guard lock(mu_);
  auto it = cache_.find(tool.name);
  if (it != cache_.end()) return it->second;
  Records records;
  fs::path dir = fixtures_dir_ / tool.name;
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    auto doc = nlohmann::ordered_json::parse(in);
    for (const auto& rec : doc) {
      // Record args are already canonical apart from defaults and key order.
      auto obj = nlohmann::json::object();
      for (const auto& [k, v] : rec.at("args").items()) {
        const ParamSpec* spec = nullptr;
        for (const auto& p : tool.params) {
          if (p.name == k) spec = &p;
        }
        if (spec && spec->default_value &&
            script::equals(script::from_json(v), *spec->default_value)) {
          continue;
        }
        obj[k] = nlohmann::json::parse(v.dump());
      }
      records.emplace(obj.dump(), rec.at("result"));
    }
  }
  return cache_.emplace(tool.name, std::move(records)).first->second;
}

Value FixtureStore::lookup(const ToolDescriptor& tool, const ArgMap& args,
                           const ToolContext& ctx) const {
  const auto& records = records_for(tool);
  std::string key = canonical_key(tool, args, ctx);
  auto it = records.find(key);
  if (it == records.end()) {
    throw ToolError(ToolErrorKind::FixtureMiss,
                    "no recorded output for " + tool.name + " with arguments " + key);
  }
  auto result = it->second;
  std::string wd = ctx.working_dir.empty() ? std::string(kWorkdirToken)
                                         : fs::absolute(ctx.working_dir).lexically_normal().string();
  expand_tokens(result, dataset_root_.string(), wd);
  return script::from_json(result);
}

}  // namespace pathagent::tools
