#pragma once

// Types shared by the interpreter, builtins and module shims. Not installed.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pathagent/script/ast.hpp"
#include "pathagent/script/host.hpp"
#include "pathagent/script/interpreter.hpp"

namespace pathagent::script {

/// Built-in type objects: int, str, float, ...; calling converts.
class TypeObject : public Callable {
 public:
  TypeObject(std::string name, HostFn ctor) : name_(std::move(name)), ctor_(std::move(ctor)) {}
  std::string_view name() const override { return name_; }
  std::string_view kind() const override { return "class"; }
  Value call(Interpreter& interp, CallArgs args) override { return ctor_(interp, args); }

 private:
  std::string name_;
  HostFn ctor_;
};

/// Exception classes usable in except clauses and isinstance().
class ExceptionType : public Callable {
 public:
  explicit ExceptionType(std::string name) : name_(std::move(name)) {}
  std::string_view name() const override { return name_; }
  std::string_view kind() const override { return "class"; }
  Value call(Interpreter& interp, CallArgs args) override;

 private:
  std::string name_;
};

class ExceptionObject : public HostObject {
 public:
  ExceptionObject(std::string type, std::string message)
      : type_(std::move(type)), message_(std::move(message)) {}
  std::string type_name() const override { return type_; }
  std::optional<Value> get_attr(Interpreter& interp, std::string_view attr) override;
  std::string repr() const override;
  std::string str() const override { return message_; }
  const std::string& message() const { return message_; }

 private:
  std::string type_;
  std::string message_;
};

/// True if a fault of type `fault` is caught by `except handler`.
bool exception_matches(std::string_view fault, std::string_view handler);

/// obj.method bound to its receiver.
class BoundMethod : public Callable {
 public:
  BoundMethod(Value self, std::string method) : self_(std::move(self)), method_(std::move(method)) {}
  std::string_view name() const override { return method_; }
  std::string_view kind() const override { return "built-in method"; }
  Value call(Interpreter& interp, CallArgs args) override;

 private:
  Value self_;
  std::string method_;
};

class RangeObject : public HostObject {
 public:
  RangeObject(std::int64_t start, std::int64_t stop, std::int64_t step)
      : start(start), stop(stop), step(step) {}
  std::string type_name() const override { return "range"; }
  std::string repr() const override;
  std::int64_t size() const;
  std::int64_t at(std::int64_t i) const { return start + i * step; }
  std::int64_t start, stop, step;
};

/// Materialized iterator returned by iter(); next() advances it.
class IteratorObject : public HostObject {
 public:
  explicit IteratorObject(std::vector<Value> items) : items(std::move(items)) {}
  std::string type_name() const override { return "iterator"; }
  std::vector<Value> items;
  std::size_t pos = 0;
};

class FileHandle : public HostObject {
 public:
  FileHandle(std::filesystem::path path, std::string display, char mode);
  std::string type_name() const override { return "TextIOWrapper"; }
  std::optional<Value> get_attr(Interpreter& interp, std::string_view attr) override;
  std::string repr() const override;
  std::string read_all();
  std::vector<std::string> read_lines();
  void write(const std::string& s);
  void close();
  bool closed() const { return closed_; }
  char mode() const { return mode_; }

 private:
  void ensure_open() const;
  std::filesystem::path path_;
  std::string display_;
  char mode_;
  bool closed_ = false;
  std::string content_;  // read mode buffer
  std::size_t read_pos_ = 0;
  std::ofstream out_;
};

class UserFunction : public Callable {
 public:
  std::string_view name() const override { return name_; }
  std::string_view kind() const override { return "function"; }
  Value call(Interpreter& interp, CallArgs args) override;

  std::string name_;
  std::shared_ptr<const ast::Parameters> params;
  std::vector<std::optional<Value>> defaults;  // parallel to params->params
  const Block* body = nullptr;                 // def
  const Expr* expr = nullptr;                  // lambda
  std::shared_ptr<Frame> closure;
  std::shared_ptr<const Module> module;  // keeps the AST alive
};

/// open() rooted in the sandbox.
Value builtin_open(Interpreter& interp, CallArgs& args);

/// Builtin name table (print, len, ...). Shared, immutable.
const std::map<std::string, Value, std::less<>>& builtin_table();

bool has_builtin_method(const Value& self, std::string_view name);
Value call_builtin_method(Interpreter& interp, const Value& self, std::string_view name,
                          CallArgs& args);

/// Ordering used by <, sorted(), min() and max(). Raises TypeError for
/// unorderable pairs.
bool less_than(const Value& a, const Value& b);

// UTF-8 helpers. Strings are stored as UTF-8; indexing and len() work on
// code points.
bool is_ascii(std::string_view s);
std::vector<std::string_view> utf8_chars(std::string_view s);
std::size_t utf8_length(std::string_view s);

/// Python-style index normalization; false if out of range.
bool normalize_index(std::int64_t& i, std::size_t size);

/// Resolved slice indices for a sequence of `size`.
struct SliceIndices {
  std::int64_t start, stop, step;
  std::size_t length;
};
SliceIndices resolve_slice(const Value& lower, const Value& upper, const Value& step,
                           std::size_t size);

}  // namespace pathagent::script
