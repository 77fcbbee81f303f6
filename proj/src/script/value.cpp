#include "pathagent/script/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pathagent/script/errors.hpp"

namespace pathagent::script {

std::optional<Value> HostObject::get_attr(Interpreter&, std::string_view) {
  return std::nullopt;
}

std::string HostObject::repr() const { return "<" + type_name() + " object>"; }

Value Value::boolean(bool b) { return Value(Storage(b)); }
Value Value::integer(std::int64_t i) { return Value(Storage(i)); }
Value Value::number(double d) { return Value(Storage(d)); }
Value Value::string(std::string s) { return Value(Storage(std::move(s))); }
Value Value::list(std::vector<Value> items) {
  auto l = std::make_shared<ListObject>();
  l->items = std::move(items);
  return Value(Storage(std::move(l)));
}
Value Value::tuple(std::vector<Value> items) {
  auto t = std::make_shared<TupleObject>();
  t->items = std::move(items);
  return Value(Storage(std::shared_ptr<const TupleObject>(std::move(t))));
}
Value Value::dict() { return Value(Storage(std::make_shared<DictObject>())); }
Value Value::dict(std::shared_ptr<DictObject> d) { return Value(Storage(std::move(d))); }
Value Value::callable(std::shared_ptr<Callable> c) { return Value(Storage(std::move(c))); }
Value Value::object(std::shared_ptr<HostObject> o) { return Value(Storage(std::move(o))); }

Value::Kind Value::kind() const { return static_cast<Kind>(data_.index()); }

bool Value::is_numeric() const {
  auto k = kind();
  return k == Kind::Int || k == Kind::Float || k == Kind::Bool;
}

std::int64_t Value::as_int() const {
  if (is_bool()) return as_bool() ? 1 : 0;
  return std::get<std::int64_t>(data_);
}

double Value::as_double() const {
  switch (kind()) {
    case Kind::Float: return std::get<double>(data_);
    case Kind::Int: return static_cast<double>(std::get<std::int64_t>(data_));
    case Kind::Bool: return as_bool() ? 1.0 : 0.0;
    default: return 0.0;
  }
}

std::string Value::type_name() const {
  switch (kind()) {
    case Kind::None: return "NoneType";
    case Kind::Bool: return "bool";
    case Kind::Int: return "int";
    case Kind::Float: return "float";
    case Kind::Str: return "str";
    case Kind::List: return "list";
    case Kind::Dict: return "dict";
    case Kind::Tuple: return "tuple";
    case Kind::Callable: {
      auto k = as_callable()->kind();
      return k == "function" ? "function" : "builtin_function_or_method";
    }
    case Kind::Object: return as_object()->type_name();
  }
  return "object";
}

bool Value::is_same(const Value& other) const {
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::List: return list_ptr() == other.list_ptr();
    case Kind::Dict: return dict_ptr() == other.dict_ptr();
    case Kind::Tuple:
      return std::get<std::shared_ptr<const TupleObject>>(data_) ==
             std::get<std::shared_ptr<const TupleObject>>(other.data_);
    case Kind::Callable: return as_callable() == other.as_callable();
    case Kind::Object: return as_object() == other.as_object();
    default: return equals(*this, other);
  }
}

const Value* DictObject::find(const DictKey& k) const {
  auto it = index_.find(k);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

Value* DictObject::find(const DictKey& k) {
  auto it = index_.find(k);
  return it == index_.end() ? nullptr : &entries_[it->second].second;
}

void DictObject::set(const DictKey& k, Value v) {
  if (auto* existing = find(k)) {
    *existing = std::move(v);
    return;
  }
  index_.emplace(k, entries_.size());
  entries_.emplace_back(key_to_value(k), std::move(v));
}

bool DictObject::erase(const DictKey& k) {
  auto it = index_.find(k);
  if (it == index_.end()) return false;
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(it->second));
  reindex();
  return true;
}

void DictObject::clear() {
  entries_.clear();
  index_.clear();
}

void DictObject::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    index_.emplace(*to_dict_key(entries_[i].first), i);
  }
}

std::optional<DictKey> to_dict_key(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Str: return DictKey(v.as_str());
    case Value::Kind::Int:
    case Value::Kind::Bool: return DictKey(v.as_int());
    case Value::Kind::Float: {
      double d = v.as_double();
      if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.2e18) {
        return DictKey(static_cast<std::int64_t>(d));
      }
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

Value key_to_value(const DictKey& k) {
  if (const auto* i = std::get_if<std::int64_t>(&k)) return Value::integer(*i);
  return Value::string(std::get<std::string>(k));
}

namespace {

constexpr int kMaxNesting = 500;
thread_local int equals_depth = 0;
thread_local std::vector<const void*> repr_stack;

struct NestingGuard {
  int& depth;
  explicit NestingGuard(int& d) : depth(d) {
    if (++depth > kMaxNesting) {
      --depth;
      throw ScriptFault("RecursionError", "maximum recursion depth exceeded in comparison");
    }
  }
  ~NestingGuard() { --depth; }
};

/// Marks a container as being rendered; false if it already is (a cycle).
struct ReprGuard {
  bool entered = false;
  explicit ReprGuard(const void* p) {
    for (const void* q : repr_stack) {
      if (q == p) return;
    }
    if (repr_stack.size() >= kMaxNesting) {
      throw ScriptFault("RecursionError", "maximum recursion depth exceeded while getting the repr");
    }
    repr_stack.push_back(p);
    entered = true;
  }
  ~ReprGuard() {
    if (entered) repr_stack.pop_back();
  }
};

}  // namespace

bool equals(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_float() || b.is_float()) return a.as_double() == b.as_double();
    return a.as_int() == b.as_int();
  }
  if (a.kind() != b.kind()) return false;
  if (a.is_list() || a.is_tuple() || a.is_dict()) {
    if (a.is_same(b)) return true;
  }
  NestingGuard guard(equals_depth);
  switch (a.kind()) {
    case Value::Kind::None: return true;
    case Value::Kind::Str: return a.as_str() == b.as_str();
    case Value::Kind::List: {
      const auto& x = a.as_list().items;
      const auto& y = b.as_list().items;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!equals(x[i], y[i])) return false;
      }
      return true;
    }
    case Value::Kind::Tuple: {
      const auto& x = a.as_tuple().items;
      const auto& y = b.as_tuple().items;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!equals(x[i], y[i])) return false;
      }
      return true;
    }
    case Value::Kind::Dict: {
      const auto& x = a.as_dict();
      const auto& y = b.as_dict();
      if (x.size() != y.size()) return false;
      for (const auto& [k, v] : x.entries()) {
        const Value* other = y.find(*to_dict_key(k));
        if (other == nullptr || !equals(v, *other)) return false;
      }
      return true;
    }
    case Value::Kind::Object: return a.as_object()->equals(*b.as_object());
    default: return a.is_same(b);
  }
}

bool truthy(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None: return false;
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::Int: return v.as_int() != 0;
    case Value::Kind::Float: return v.as_double() != 0.0;
    case Value::Kind::Str: return !v.as_str().empty();
    case Value::Kind::List: return !v.as_list().items.empty();
    case Value::Kind::Tuple: return !v.as_tuple().items.empty();
    case Value::Kind::Dict: return v.as_dict().size() != 0;
    default: return true;
  }
}

std::string float_repr(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  if (d == 0.0) return std::signbit(d) ? "-0.0" : "0.0";

  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  bool negative = sci[0] == '-';
  if (negative) sci.erase(0, 1);
  auto epos = sci.find('e');
  std::string mantissa = sci.substr(0, epos);
  int exponent = std::stoi(sci.substr(epos + 1));
  std::string digits;
  for (char c : mantissa) {
    if (c != '.') digits.push_back(c);
  }

  std::string out;
  if (exponent >= -4 && exponent < 16) {
    // fixed notation
    if (exponent < 0) {
      out = "0." + std::string(static_cast<std::size_t>(-exponent - 1), '0') + digits;
    } else {
      auto int_len = static_cast<std::size_t>(exponent + 1);
      if (digits.size() <= int_len) {
        out = digits + std::string(int_len - digits.size(), '0') + ".0";
      } else {
        out = digits.substr(0, int_len) + "." + digits.substr(int_len);
      }
    }
  } else {
    out = digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    char ebuf[16];
    std::snprintf(ebuf, sizeof(ebuf), "e%c%02d", exponent < 0 ? '-' : '+',
                  exponent < 0 ? -exponent : exponent);
    out += ebuf;
  }
  return negative ? "-" + out : out;
}

namespace {

std::string repr_string(const std::string& s) {
  bool has_single = s.find('\'') != std::string::npos;
  bool has_double = s.find('"') != std::string::npos;
  char quote = (has_single && !has_double) ? '"' : '\'';
  std::string out(1, quote);
  for (unsigned char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c == static_cast<unsigned char>(quote)) {
          out += '\\';
          out += static_cast<char>(c);
        } else if (c < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\x%02x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += quote;
  return out;
}

}  // namespace

std::string repr(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None: return "None";
    case Value::Kind::Bool: return v.as_bool() ? "True" : "False";
    case Value::Kind::Int: return std::to_string(v.as_int());
    case Value::Kind::Float: return float_repr(v.as_double());
    case Value::Kind::Str: return repr_string(v.as_str());
    case Value::Kind::List: {
      ReprGuard guard(v.list_ptr().get());
      if (!guard.entered) return "[...]";
      std::string out = "[";
      const auto& items = v.as_list().items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += repr(items[i]);
      }
      return out + "]";
    }
    case Value::Kind::Tuple: {
      ReprGuard guard(&v.as_tuple());
      if (!guard.entered) return "(...)";
      std::string out = "(";
      const auto& items = v.as_tuple().items;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += repr(items[i]);
      }
      if (items.size() == 1) out += ",";
      return out + ")";
    }
    case Value::Kind::Dict: {
      ReprGuard guard(v.dict_ptr().get());
      if (!guard.entered) return "{...}";
      std::string out = "{";
      bool first = true;
      for (const auto& [k, val] : v.as_dict().entries()) {
        if (!first) out += ", ";
        first = false;
        out += repr(k) + ": " + repr(val);
      }
      return out + "}";
    }
    case Value::Kind::Callable: {
      const auto& c = v.as_callable();
      if (c->kind() == "class") return "<class '" + std::string(c->name()) + "'>";
      return "<" + std::string(c->kind()) + " " + std::string(c->name()) + ">";
    }
    case Value::Kind::Object: return v.as_object()->repr();
  }
  return "?";
}

std::string str(const Value& v) {
  if (v.is_str()) return v.as_str();
  if (v.is_object()) return v.as_object()->str();
  return repr(v);
}

}  // namespace pathagent::script
