#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathagent/script/interpreter.hpp"
#include "pathagent/script/value.hpp"

namespace pathagent::tools {

enum class Category {
  histology_roi,
  dataset_check,
  dataset_pipeline,
  nuclei_contour,
  wsi_analysis,
  wsi_classification,
  docs_retriever,
};

const char* to_string(Category c);
/// Throws std::invalid_argument for unknown names.
Category category_from_string(std::string_view s);
const std::vector<Category>& all_categories();

struct ParamSpec {
  std::string name;
  /// Python-style annotation, e.g. "str", "float", "list[str] | None",
  /// "list[tuple[float, float]]". Used for rendering and argument checks.
  std::string type;
  bool required = true;
  std::optional<script::Value> default_value;
  std::string doc;
};

struct ToolDescriptor {
  std::string name;
  Category category = Category::histology_roi;
  /// Free text: summary plus optional Notes / Prerequisites sections.
  std::string description;
  std::vector<ParamSpec> params;
  /// Return annotation ("dict").
  std::string returns_type = "dict";
  /// Body of the "Returns" section, one entry per line.
  std::vector<std::string> returns;

  /// "name(a: str, b: int = 3)".
  std::string signature() const;
};

using ArgMap = std::map<std::string, script::Value, std::less<>>;

/// Per-call context. Relative path arguments are taken from working_dir.
struct ToolContext {
  std::filesystem::path working_dir;
};

using ToolFn = std::function<script::Value(const ArgMap&, const ToolContext&)>;

struct ToolBinding {
  ToolDescriptor descriptor;
  ToolFn callable;
  bool deterministic = true;
  std::optional<std::filesystem::path> fixture_source;
};

enum class ToolErrorKind { DuplicateTool, UnknownTool, ArgumentError, DegenerateContour, FixtureMiss };

const char* to_string(ToolErrorKind k);

class ToolError : public std::runtime_error {
 public:
  ToolError(ToolErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ToolErrorKind kind() const { return kind_; }

 private:
  ToolErrorKind kind_;
};

/// Tool contracts and their host implementations. Immutable once set up;
/// const access is safe from several threads.
class Registry {
 public:
  void register_tool(ToolBinding binding);

  std::size_t size() const { return tools_.size(); }
  bool empty() const { return tools_.empty(); }
  const ToolBinding* find(std::string_view name) const;
  /// In registration order.
  const std::vector<ToolBinding>& tools() const { return tools_; }

  /// One docstring block per tool, registration order, optionally filtered.
  std::string render_tool_docs(const std::optional<std::set<Category>>& categories = {}) const;

  /// Checks arguments against the descriptor, fills defaults and calls.
  script::Value invoke(std::string_view name, const ArgMap& args,
                       const ToolContext& ctx = {}) const;
  /// Python-style call: positional then keyword arguments.
  script::Value invoke(std::string_view name, const script::CallArgs& args,
                       const ToolContext& ctx = {}) const;

  /// Callables for the interpreter's global namespace. Tool errors surface
  /// in scripts as exceptions named after the error kind.
  script::Bindings script_bindings(const std::optional<std::set<Category>>& categories = {}) const;

 private:
  std::vector<ToolBinding> tools_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Binds call arguments to the descriptor's parameters (checking names and
/// types, filling defaults) and runs the callable.
script::Value invoke_binding(const ToolBinding& tool, const script::CallArgs& args,
                             const ToolContext& ctx);

/// Renders one tool in the docstring layout used for the system prompt.
std::string render_tool_block(const ToolDescriptor& d);

/// True when `v` conforms to the annotation `type`.
bool matches_type(const script::Value& v, std::string_view type);

}  // namespace pathagent::tools
