#pragma once

#include <memory>
#include <string>

#include "pathagent/script/ast.hpp"
#include "pathagent/script/errors.hpp"

namespace pathagent::script {

/// An immutable parsed program. Cheap to copy.
class ScriptProgram {
 public:
  const Module& module() const { return *module_; }
  const std::shared_ptr<const Module>& module_ptr() const { return module_; }
  const std::string& source() const { return module_->source; }
  const Block& body() const { return module_->body; }
  std::size_t node_count() const { return count_nodes(*module_); }

 private:
  friend ScriptProgram parse(std::string source);
  std::shared_ptr<const Module> module_;
};

/// Parses a program. Throws ParseError with the 1-based position of the
/// first offending token.
ScriptProgram parse(std::string source);

}  // namespace pathagent::script
