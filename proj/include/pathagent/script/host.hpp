#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathagent/script/errors.hpp"
#include "pathagent/script/value.hpp"

namespace pathagent::script {

using HostFn = std::function<Value(Interpreter&, CallArgs&)>;

/// A host-implemented callable.
class HostFunction : public Callable {
 public:
  HostFunction(std::string name, HostFn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string_view name() const override { return name_; }
  Value call(Interpreter& interp, CallArgs args) override { return fn_(interp, args); }

 private:
  std::string name_;
  HostFn fn_;
};

Value make_function(std::string name, HostFn fn);
/// An exception class usable in `except` clauses; derives from Exception.
Value make_exception_type(std::string name);

[[noreturn]] void raise_fault(std::string type, std::string message);

/// Binds call arguments to named parameters, Python style. The first
/// `required` names are mandatory. Extra positional or unknown keyword
/// arguments raise TypeError.
std::vector<std::optional<Value>> bind_arguments(std::string_view fname, const CallArgs& args,
                                                 std::initializer_list<std::string_view> names,
                                                 std::size_t required);

std::int64_t expect_int(const Value& v, std::string_view what);
double expect_number(const Value& v, std::string_view what);
const std::string& expect_str(const Value& v, std::string_view what);

/// Checked 64-bit arithmetic; OverflowError on overflow.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

/// Host objects exposing a fixed attribute table (modules, namespaces).
class ModuleObject : public HostObject {
 public:
  explicit ModuleObject(std::string name) : name_(std::move(name)) {}
  std::string type_name() const override { return "module"; }
  std::optional<Value> get_attr(Interpreter& interp, std::string_view attr) override;
  std::string repr() const override { return "<module '" + name_ + "'>"; }
  void set(std::string name, Value v) { attrs_.emplace_back(std::move(name), std::move(v)); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<std::pair<std::string, Value>> attrs_;
};

}  // namespace pathagent::script
