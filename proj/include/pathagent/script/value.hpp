#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pathagent::script {

class Value;
class Interpreter;

struct ListObject {
  std::vector<Value> items;
};

struct TupleObject {
  std::vector<Value> items;
};

/// Dictionary keys are restricted to strings and 64-bit integers.
/// Booleans and integral floats are folded into integer keys.
using DictKey = std::variant<std::int64_t, std::string>;

class DictObject;

/// Positional and keyword arguments of a single call.
struct CallArgs {
  std::vector<Value> positional;
  std::vector<std::pair<std::string, Value>> keywords;
};

class Callable {
 public:
  virtual ~Callable() = default;
  virtual std::string_view name() const = 0;
  virtual Value call(Interpreter& interp, CallArgs args) = 0;
  /// Short kind label used in repr(), e.g. "built-in function" or "function".
  virtual std::string_view kind() const { return "built-in function"; }
};

/// Interpreter-internal objects that are neither plain data nor callables:
/// modules, file handles, paths, ranges, exceptions.
class HostObject {
 public:
  virtual ~HostObject() = default;
  virtual std::string type_name() const = 0;
  virtual std::optional<Value> get_attr(Interpreter& interp,
                                        std::string_view attr);
  virtual std::string repr() const;
  virtual std::string str() const { return repr(); }
  /// Value equality for ==; identity unless overridden.
  virtual bool equals(const HostObject& other) const { return this == &other; }
};

class Value {
 public:
  enum class Kind { None, Bool, Int, Float, Str, List, Dict, Tuple, Callable, Object };

  Value() = default;
  static Value none() { return Value(); }
  static Value boolean(bool b);
  static Value integer(std::int64_t i);
  static Value number(double d);
  static Value string(std::string s);
  static Value list(std::vector<Value> items = {});
  static Value tuple(std::vector<Value> items = {});
  static Value dict();
  static Value dict(std::shared_ptr<DictObject> d);
  static Value callable(std::shared_ptr<Callable> c);
  static Value object(std::shared_ptr<HostObject> o);

  Kind kind() const;
  bool is_none() const { return kind() == Kind::None; }
  bool is_bool() const { return kind() == Kind::Bool; }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_float() const { return kind() == Kind::Float; }
  /// Int or Float or Bool (bool participates in arithmetic as an int).
  bool is_numeric() const;
  bool is_str() const { return kind() == Kind::Str; }
  bool is_list() const { return kind() == Kind::List; }
  bool is_dict() const { return kind() == Kind::Dict; }
  bool is_tuple() const { return kind() == Kind::Tuple; }
  bool is_callable() const { return kind() == Kind::Callable; }
  bool is_object() const { return kind() == Kind::Object; }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const;  // accepts Bool as well
  double as_double() const;     // accepts Int, Bool and Float
  const std::string& as_str() const { return std::get<std::string>(data_); }
  ListObject& as_list() const { return *std::get<std::shared_ptr<ListObject>>(data_); }
  const std::shared_ptr<ListObject>& list_ptr() const {
    return std::get<std::shared_ptr<ListObject>>(data_);
  }
  DictObject& as_dict() const { return *std::get<std::shared_ptr<DictObject>>(data_); }
  const std::shared_ptr<DictObject>& dict_ptr() const {
    return std::get<std::shared_ptr<DictObject>>(data_);
  }
  const TupleObject& as_tuple() const {
    return *std::get<std::shared_ptr<const TupleObject>>(data_);
  }
  const std::shared_ptr<Callable>& as_callable() const {
    return std::get<std::shared_ptr<Callable>>(data_);
  }
  const std::shared_ptr<HostObject>& as_object() const {
    return std::get<std::shared_ptr<HostObject>>(data_);
  }

  /// Python-style type name ("int", "list", "NoneType", ...).
  std::string type_name() const;

  /// Identity for reference types, equality for scalars.
  bool is_same(const Value& other) const;

 private:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string,
                               std::shared_ptr<ListObject>, std::shared_ptr<DictObject>,
                               std::shared_ptr<const TupleObject>, std::shared_ptr<Callable>,
                               std::shared_ptr<HostObject>>;
  explicit Value(Storage s) : data_(std::move(s)) {}
  Storage data_;
};

/// Insertion-ordered mapping with a duplicate-free key set.
class DictObject {
 public:
  std::size_t size() const { return entries_.size(); }
  bool contains(const DictKey& k) const { return index_.count(k) != 0; }
  const Value* find(const DictKey& k) const;
  Value* find(const DictKey& k);
  void set(const DictKey& k, Value v);
  bool erase(const DictKey& k);
  void clear();

  /// Entries in insertion order; first is the key as a Value.
  const std::vector<std::pair<Value, Value>>& entries() const { return entries_; }

 private:
  void reindex();
  std::vector<std::pair<Value, Value>> entries_;
  std::map<DictKey, std::size_t> index_;
};

/// Converts a value to a dictionary key, or nullopt when the value's type
/// is not a legal key.
std::optional<DictKey> to_dict_key(const Value& v);
Value key_to_value(const DictKey& k);

/// Structural equality. Numbers compare across int/float/bool.
bool equals(const Value& a, const Value& b);

bool truthy(const Value& v);

/// Python repr()/str() renderings.
std::string repr(const Value& v);
std::string str(const Value& v);

/// Shortest round-trip float rendering in Python's repr style ("1.0", "1e-05").
std::string float_repr(double d);

}  // namespace pathagent::script
