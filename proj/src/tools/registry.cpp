#include "pathagent/tools/registry.hpp"

#include <algorithm>
#include <sstream>

#include "pathagent/script/host.hpp"
#include "pathagent/script/modules.hpp"

namespace pathagent::tools {

using script::CallArgs;
using script::Value;

namespace {

const std::vector<std::pair<Category, const char*>> kCategoryNames = {
    {Category::histology_roi, "histology_roi"},
    {Category::dataset_check, "dataset_check"},
    {Category::dataset_pipeline, "dataset_pipeline"},
    {Category::nuclei_contour, "nuclei_contour"},
    {Category::wsi_analysis, "wsi_analysis"},
    {Category::wsi_classification, "wsi_classification"},
    {Category::docs_retriever, "docs_retriever"},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

// Splits on `sep` at bracket depth zero.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
    if (s[i] == sep && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

bool matches_single(const Value& v, std::string_view type) {
  std::string_view base = type;
  std::string_view inner;
  if (auto lb = type.find('['); lb != std::string_view::npos && type.back() == ']') {
    base = trim(type.substr(0, lb));
    inner = type.substr(lb + 1, type.size() - lb - 2);
  }
  if (base == "str") return v.is_str() || script::path_string(v).has_value();
  if (base == "int") return v.is_int() || v.is_bool();
  if (base == "float") return v.is_numeric();
  if (base == "bool") return v.is_bool();
  if (base == "None") return v.is_none();
  if (base == "dict") return v.is_dict();
  if (base == "list" || base == "tuple") {
    if (!v.is_list() && !v.is_tuple()) return false;
    const auto& items = v.is_list() ? v.as_list().items : v.as_tuple().items;
    if (inner.empty()) return true;
    if (base == "list") {
      return std::all_of(items.begin(), items.end(),
                         [&](const Value& e) { return matches_type(e, inner); });
    }
    auto parts = split_top(inner, ',');
    if (parts.size() != items.size()) return false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!matches_type(items[i], parts[i])) return false;
    }
    return true;
  }
  return true;  // Any, object, and annotations we do not check
}

[[noreturn]] void argument_error(const ToolDescriptor& d, const std::string& what) {
  throw ToolError(ToolErrorKind::ArgumentError,
                  d.name + "() " + what + "; expected signature: " + d.signature() + " -> " +
                      d.returns_type);
}

}  // namespace

const char* to_string(Category c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "?";
}

Category category_from_string(std::string_view s) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (s == name) return cat;
  }
  throw std::invalid_argument("unknown tool category: " + std::string(s));
}

const std::vector<Category>& all_categories() {
  static const std::vector<Category> cats = [] {
    std::vector<Category> v;
    for (const auto& entry : kCategoryNames) v.push_back(entry.first);
    return v;
  }();
  return cats;
}

const char* to_string(ToolErrorKind k) {
  switch (k) {
    case ToolErrorKind::DuplicateTool: return "DuplicateTool";
    case ToolErrorKind::UnknownTool: return "UnknownTool";
    case ToolErrorKind::ArgumentError: return "ArgumentError";
    case ToolErrorKind::DegenerateContour: return "DegenerateContour";
    case ToolErrorKind::FixtureMiss: return "FixtureMiss";
  }
  return "ToolError";
}

bool matches_type(const Value& v, std::string_view type) {
  for (auto alt : split_top(type, '|')) {
    if (matches_single(v, alt)) return true;
  }
  return false;
}

std::string ToolDescriptor::signature() const {
  std::string out = name + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (i) out += ", ";
    out += p.name + ": " + p.type;
    if (p.default_value) out += " = " + script::repr(*p.default_value);
  }
  return out + ")";
}

std::string render_tool_block(const ToolDescriptor& d) {
  std::ostringstream out;
  out << "def " << d.signature() << " -> " << d.returns_type << ":\n";
  out << "    \"\"\"\n";
  std::istringstream desc(d.description);
  std::string line;
  while (std::getline(desc, line)) {
    if (line.empty()) {
      out << "\n";
    } else {
      out << "    " << line << "\n";
    }
  }
  if (!d.returns.empty()) {
    out << "\n    Returns (" << d.returns_type << "):\n";
    for (const auto& r : d.returns) out << "      - " << r << "\n";
  }
  if (!d.params.empty()) {
    out << "\n    Args:\n";
    for (const auto& p : d.params) out << "      " << p.name << ": " << p.doc << "\n";
  }
  out << "    \"\"\"\n";
  return out.str();
}

void Registry::register_tool(ToolBinding binding) {
  const std::string& name = binding.descriptor.name;
  if (index_.count(name)) {
    throw ToolError(ToolErrorKind::DuplicateTool, "tool already registered: " + name);
  }
  index_.emplace(name, tools_.size());
  tools_.push_back(std::move(binding));
}

const ToolBinding* Registry::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &tools_[it->second];
}

std::string Registry::render_tool_docs(const std::optional<std::set<Category>>& categories) const {
  std::string out;
  for (const auto& t : tools_) {
    if (categories && !categories->count(t.descriptor.category)) continue;
    if (!out.empty()) out += "\n";
    out += render_tool_block(t.descriptor);
  }
  return out;
}

Value invoke_binding(const ToolBinding& tool, const CallArgs& args, const ToolContext& ctx) {
  const auto& d = tool.descriptor;
  if (args.positional.size() > d.params.size()) {
    argument_error(d, "takes " + std::to_string(d.params.size()) + " arguments but " +
                          std::to_string(args.positional.size()) + " were given");
  }
  std::vector<std::optional<Value>> slots(d.params.size());
  for (std::size_t i = 0; i < args.positional.size(); ++i) slots[i] = args.positional[i];
  for (const auto& [key, value] : args.keywords) {
    auto it = std::find_if(d.params.begin(), d.params.end(),
                           [&](const ParamSpec& p) { return p.name == key; });
    if (it == d.params.end()) argument_error(d, "got an unexpected argument '" + key + "'");
    auto idx = static_cast<std::size_t>(it - d.params.begin());
    if (slots[idx]) argument_error(d, "got multiple values for argument '" + key + "'");
    slots[idx] = value;
  }
  ArgMap bound;
  for (std::size_t i = 0; i < d.params.size(); ++i) {
    const auto& p = d.params[i];
    if (!slots[i]) {
      if (p.required) argument_error(d, "missing required argument '" + p.name + "'");
      bound.emplace(p.name, p.default_value.value_or(Value::none()));
      continue;
    }
    if (!matches_type(*slots[i], p.type)) {
      argument_error(d, "argument '" + p.name + "' must be " + p.type + ", not " +
                            slots[i]->type_name());
    }
    bound.emplace(p.name, *slots[i]);
  }
  return tool.callable(bound, ctx);
}

Value Registry::invoke(std::string_view name, const CallArgs& args, const ToolContext& ctx) const {
  const ToolBinding* tool = find(name);
  if (!tool) throw ToolError(ToolErrorKind::UnknownTool, "unknown tool: " + std::string(name));
  return invoke_binding(*tool, args, ctx);
}

Value Registry::invoke(std::string_view name, const ArgMap& args, const ToolContext& ctx) const {
  CallArgs call;
  for (const auto& [k, v] : args) call.keywords.emplace_back(k, v);
  return invoke(name, call, ctx);
}

script::Bindings Registry::script_bindings(const std::optional<std::set<Category>>& categories) const {
  script::Bindings out;
  for (auto kind : {ToolErrorKind::UnknownTool, ToolErrorKind::ArgumentError,
                    ToolErrorKind::DegenerateContour, ToolErrorKind::FixtureMiss}) {
    out.emplace(to_string(kind), script::make_exception_type(to_string(kind)));
  }
  for (const auto& t : tools_) {
    if (categories && !categories->count(t.descriptor.category)) continue;
    out.emplace(t.descriptor.name,
                script::make_function(t.descriptor.name,
                                      [tool = t](script::Interpreter& interp, CallArgs& args) {
                                        try {
                                          return invoke_binding(
                                              tool, args, ToolContext{interp.sandbox().working_dir()});
                                        } catch (const ToolError& e) {
                                          script::raise_fault(to_string(e.kind()), e.what());
                                        }
                                      }));
  }
  return out;
}

}  // namespace pathagent::tools
