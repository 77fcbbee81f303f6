#include "pathagent/agent/prompt.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pathagent/tools/catalog.hpp"

namespace pathagent::agent {

namespace {

std::string read_asset(const std::string& name) {
  auto path = tools::asset_dir() / name;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing asset: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string python_list(const std::set<std::string>& names) {
  std::string out = "[";
  for (const auto& n : names) {
    if (out.size() > 1) out += ", ";
    out += "'" + n + "'";
  }
  return out + "]";
}

void substitute(std::string& text, const std::string& token, const std::string& value) {
  for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
    text.replace(pos, token.size(), value);
  }
}

std::string fill(std::string text, const script::InterpreterLimits& limits) {
  substitute(text, "{allowed_imports}", python_list(limits.allowed_imports));
  substitute(text, "{forbidden_imports}", python_list(limits.forbidden_imports));
  substitute(text, "{max_operations}", std::to_string(limits.max_operations));
  return text;
}

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace

std::string build_system_prompt(const std::string& general, const tools::Registry* registry,
                                const std::optional<std::set<tools::Category>>& categories,
                                const std::string& special, const std::string& extra_tool_docs) {
  std::string out = trim_trailing_newlines(general);
  out += "\n\n";
  out += kToolsHeader;
  out += "\n";
  std::string docs = registry ? registry->render_tool_docs(categories) : std::string();
  if (!extra_tool_docs.empty()) {
    if (!docs.empty()) docs += "\n";
    docs += extra_tool_docs;
  }
  if (!docs.empty()) out += "\n" + trim_trailing_newlines(docs) + "\n";
  if (!special.empty()) {
    out += "\n";
    out += kSpecialHeader;
    out += "\n\n" + trim_trailing_newlines(special) + "\n";
  }
  return out;
}

std::string default_general_instructions(const script::InterpreterLimits& limits) {
  return fill(read_asset("general_instructions.md"), limits);
}

std::string default_special_instructions(const script::InterpreterLimits& limits) {
  return fill(read_asset("special_instructions.md"), limits);
}

std::string web_search_doc() {
  tools::ToolDescriptor d;
  d.name = "web_search";
  d.description = "Search the web for a query.\n\nNotes:\n  - Not connected in this build; the result says so.";
  d.params.push_back({"query", "str", true, std::nullopt, "Search text."});
  d.returns_type = "str";
  return tools::render_tool_block(d);
}

}  // namespace pathagent::agent
