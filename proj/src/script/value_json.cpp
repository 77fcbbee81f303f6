#include "pathagent/script/value_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pathagent/script/errors.hpp"

namespace pathagent::script {

namespace {

constexpr int kMaxDepth = 500;

std::string key_string(const Value& k) {
  if (k.is_str()) return k.as_str();
  return std::to_string(k.as_int());
}

nlohmann::ordered_json to_json_impl(const Value& v, int depth) {
  if (depth > kMaxDepth) throw ScriptFault("ValueError", "Circular reference detected");
  switch (v.kind()) {
    case Value::Kind::None: return nullptr;
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::Int: return v.as_int();
    case Value::Kind::Float: return v.as_double();
    case Value::Kind::Str: return v.as_str();
    case Value::Kind::List:
    case Value::Kind::Tuple: {
      auto arr = nlohmann::ordered_json::array();
      const auto& items = v.is_list() ? v.as_list().items : v.as_tuple().items;
      for (const auto& item : items) arr.push_back(to_json_impl(item, depth + 1));
      return arr;
    }
    case Value::Kind::Dict: {
      auto obj = nlohmann::ordered_json::object();
      for (const auto& [k, val] : v.as_dict().entries()) {
        obj[key_string(k)] = to_json_impl(val, depth + 1);
      }
      return obj;
    }
    default:
      throw ScriptFault("TypeError",
                        "Object of type " + v.type_name() + " is not JSON serializable");
  }
}

template <typename Json>
Value from_json_impl(const Json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return Value::none();
    case nlohmann::json::value_t::boolean: return Value::boolean(j.template get<bool>());
    case nlohmann::json::value_t::number_integer:
      return Value::integer(j.template get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: {
      auto u = j.template get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) return Value::number(static_cast<double>(u));
      return Value::integer(static_cast<std::int64_t>(u));
    }
    case nlohmann::json::value_t::number_float: return Value::number(j.template get<double>());
    case nlohmann::json::value_t::string: return Value::string(j.template get<std::string>());
    case nlohmann::json::value_t::array: {
      std::vector<Value> items;
      items.reserve(j.size());
      for (const auto& e : j) items.push_back(from_json_impl(e));
      return Value::list(std::move(items));
    }
    case nlohmann::json::value_t::object: {
      auto d = std::make_shared<DictObject>();
      for (auto it = j.begin(); it != j.end(); ++it) d->set(it.key(), from_json_impl(it.value()));
      return Value::dict(std::move(d));
    }
    default: return Value::none();
  }
}

// Decodes one UTF-8 sequence starting at s[i]; advances i.
std::uint32_t next_codepoint(const std::string& s, std::size_t& i) {
  auto c = static_cast<unsigned char>(s[i]);
  int extra = c >= 0xF0 ? 3 : c >= 0xE0 ? 2 : c >= 0xC0 ? 1 : 0;
  std::uint32_t cp = extra == 3 ? (c & 0x07) : extra == 2 ? (c & 0x0F) : extra == 1 ? (c & 0x1F) : c;
  ++i;
  for (int k = 0; k < extra && i < s.size(); ++k, ++i) {
    cp = (cp << 6) | (static_cast<unsigned char>(s[i]) & 0x3F);
  }
  return cp;
}

void dump_string(std::string& out, const std::string& s, bool ensure_ascii) {
  out += '"';
  char buf[16];
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c >= 0x80) {
      if (!ensure_ascii) {
        out += s[i++];
        continue;
      }
      std::uint32_t cp = next_codepoint(s, i);
      if (cp >= 0x10000) {
        cp -= 0x10000;
        std::snprintf(buf, sizeof(buf), "\\u%04x\\u%04x", 0xD800 + (cp >> 10), 0xDC00 + (cp & 0x3FF));
      } else {
        std::snprintf(buf, sizeof(buf), "\\u%04x", cp);
      }
      out += buf;
      continue;
    }
    ++i;
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

struct Dumper {
  std::optional<int> indent;
  bool sort_keys;
  bool ensure_ascii;
  std::string out;

  void newline(int level) {
    out += '\n';
    out.append(static_cast<std::size_t>(*indent * level), ' ');
  }

  void dump(const Value& v, int level) {
    if (level > kMaxDepth) throw ScriptFault("ValueError", "Circular reference detected");
    switch (v.kind()) {
      case Value::Kind::None: out += "null"; return;
      case Value::Kind::Bool: out += v.as_bool() ? "true" : "false"; return;
      case Value::Kind::Int: out += std::to_string(v.as_int()); return;
      case Value::Kind::Float: {
        double d = v.as_double();
        if (std::isnan(d)) {
          out += "NaN";
        } else if (std::isinf(d)) {
          out += d > 0 ? "Infinity" : "-Infinity";
        } else {
          out += float_repr(d);
        }
        return;
      }
      case Value::Kind::Str: dump_string(out, v.as_str(), ensure_ascii); return;
      case Value::Kind::List:
      case Value::Kind::Tuple: {
        const auto& items = v.is_list() ? v.as_list().items : v.as_tuple().items;
        if (items.empty()) {
          out += "[]";
          return;
        }
        out += '[';
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (i) out += indent ? "," : ", ";
          if (indent) newline(level + 1);
          dump(items[i], level + 1);
        }
        if (indent) newline(level);
        out += ']';
        return;
      }
      case Value::Kind::Dict: {
        const auto& entries = v.as_dict().entries();
        if (entries.empty()) {
          out += "{}";
          return;
        }
        std::vector<const std::pair<Value, Value>*> order;
        for (const auto& e : entries) order.push_back(&e);
        if (sort_keys) {
          bool mixed = std::any_of(order.begin(), order.end(), [&](auto* e) {
            return e->first.is_str() != order.front()->first.is_str();
          });
          if (mixed) {
            throw ScriptFault("TypeError",
                              "'<' not supported between instances of 'int' and 'str'");
          }
          std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
            if (a->first.is_str()) return a->first.as_str() < b->first.as_str();
            return a->first.as_int() < b->first.as_int();
          });
        }
        out += '{';
        bool first = true;
        for (const auto* e : order) {
          if (!first) out += indent ? "," : ", ";
          first = false;
          if (indent) newline(level + 1);
          dump_string(out, key_string(e->first), ensure_ascii);
          out += ": ";
          dump(e->second, level + 1);
        }
        if (indent) newline(level);
        out += '}';
        return;
      }
      default:
        throw ScriptFault("TypeError",
                          "Object of type " + v.type_name() + " is not JSON serializable");
    }
  }
};

}  // namespace

nlohmann::ordered_json to_json(const Value& v) { return to_json_impl(v, 0); }

Value from_json(const nlohmann::ordered_json& j) { return from_json_impl(j); }
Value from_json(const nlohmann::json& j) { return from_json_impl(j); }

std::string python_json_dumps(const Value& v, std::optional<int> indent, bool sort_keys,
                              bool ensure_ascii) {
  if (indent && *indent < 0) indent = 0;
  Dumper d{indent, sort_keys, ensure_ascii, {}};
  d.dump(v, 0);
  return std::move(d.out);
}

Value python_json_loads(std::string_view text) {
  try {
    return from_json(nlohmann::ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    std::string what = e.what();
    auto pos = what.find("parse error");
    throw ScriptFault("JSONDecodeError", pos == std::string::npos ? what : what.substr(pos));
  }
}

}  // namespace pathagent::script
