#include "pathagent/script/format.hpp"

#include <cfenv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "pathagent/script/errors.hpp"

namespace pathagent::script {
namespace {

struct Spec {
  char fill = ' ';
  char align = 0;  // 0 = type default
  char sign = '-';
  bool alternate = false;
  int width = -1;
  char grouping = 0;
  int precision = -1;
  char type = 0;
};

bool is_align(char c) { return c == '<' || c == '>' || c == '=' || c == '^'; }

Spec parse_spec(std::string_view s) {
  Spec spec;
  std::size_t i = 0;
  if (s.size() >= 2 && is_align(s[1])) {
    spec.fill = s[0];
    spec.align = s[1];
    i = 2;
  } else if (!s.empty() && is_align(s[0])) {
    spec.align = s[0];
    i = 1;
  }
  if (i < s.size() && (s[i] == '+' || s[i] == '-' || s[i] == ' ')) spec.sign = s[i++];
  if (i < s.size() && s[i] == '#') {
    spec.alternate = true;
    ++i;
  }
  if (i < s.size() && s[i] == '0') {
    if (spec.align == 0) {
      spec.fill = '0';
      spec.align = '=';
    }
    ++i;
  }
  int width = -1;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    width = (width < 0 ? 0 : width * 10) + (s[i++] - '0');
  }
  spec.width = width;
  if (i < s.size() && (s[i] == ',' || s[i] == '_')) spec.grouping = s[i++];
  if (i < s.size() && s[i] == '.') {
    ++i;
    int prec = 0;
    bool any = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      prec = prec * 10 + (s[i++] - '0');
      any = true;
    }
    if (!any) throw ScriptFault("ValueError", "Format specifier missing precision");
    spec.precision = prec;
  }
  if (i < s.size()) spec.type = s[i++];
  if (i != s.size()) {
    throw ScriptFault("ValueError", "Invalid format specifier '" + std::string(s) + "'");
  }
  return spec;
}

std::string group_digits(const std::string& digits, char sep) {
  // digits: the integer part without sign
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count && count % 3 == 0) out.push_back(sep);
    out.push_back(*it);
    ++count;
  }
  return {out.rbegin(), out.rend()};
}

std::string apply_grouping(const std::string& body, char sep) {
  if (!sep) return body;
  std::size_t end = 0;
  while (end < body.size() && std::isdigit(static_cast<unsigned char>(body[end]))) ++end;
  return group_digits(body.substr(0, end), sep) + body.substr(end);
}

std::string pad(const std::string& sign, const std::string& body, const Spec& spec,
                char default_align) {
  std::size_t len = sign.size() + body.size();
  if (spec.width < 0 || len >= static_cast<std::size_t>(spec.width)) return sign + body;
  std::size_t n = static_cast<std::size_t>(spec.width) - len;
  char align = spec.align ? spec.align : default_align;
  std::string fill(n, spec.fill);
  switch (align) {
    case '<': return sign + body + fill;
    case '^': {
      std::size_t left = n / 2;
      return std::string(left, spec.fill) + sign + body + std::string(n - left, spec.fill);
    }
    case '=': return sign + fill + body;
    default: return fill + sign + body;
  }
}

std::string sign_prefix(bool negative, const Spec& spec) {
  if (negative) return "-";
  if (spec.sign == '+') return "+";
  if (spec.sign == ' ') return " ";
  return "";
}

std::string cformat(const char* fmt, int prec, double v) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, prec, v);
  return buf;
}

std::string format_float(double v, const Spec& spec) {
  bool negative = std::signbit(v) && !std::isnan(v);
  double a = std::fabs(v);
  std::string body;
  char type = spec.type;
  if (std::isnan(a) || std::isinf(a)) {
    body = std::isnan(a) ? "nan" : "inf";
    if (type == 'F' || type == 'E' || type == 'G') {
      for (auto& c : body) c = static_cast<char>(std::toupper(c));
    }
    if (type == '%') body += "%";
    return pad(sign_prefix(negative, spec), body, spec, '>');
  }
  int prec = spec.precision;
  switch (type) {
    case 'f':
    case 'F': body = cformat("%.*f", prec < 0 ? 6 : prec, a); break;
    case 'e': body = cformat("%.*e", prec < 0 ? 6 : prec, a); break;
    case 'E': body = cformat("%.*E", prec < 0 ? 6 : prec, a); break;
    case 'g': body = cformat(spec.alternate ? "%#.*g" : "%.*g", prec < 0 ? 6 : prec, a); break;
    case 'G': body = cformat(spec.alternate ? "%#.*G" : "%.*G", prec < 0 ? 6 : prec, a); break;
    case '%': body = cformat("%.*f", prec < 0 ? 6 : prec, a * 100.0) + "%"; break;
    case 0:
      if (prec < 0) {
        body = float_repr(a);
      } else {
        body = cformat("%.*g", prec == 0 ? 1 : prec, a);
        if (body.find_first_of(".e") == std::string::npos) body += ".0";
      }
      break;
    default:
      throw ScriptFault("ValueError", std::string("Unknown format code '") + type +
                                          "' for object of type 'float'");
  }
  body = apply_grouping(body, spec.grouping);
  return pad(sign_prefix(negative, spec), body, spec, '>');
}

std::string to_base(std::uint64_t v, int base, bool upper) {
  if (v == 0) return "0";
  const char* digits = upper ? "0123456789ABCDEF" : "0123456789abcdef";
  std::string out;
  while (v) {
    out.push_back(digits[v % static_cast<unsigned>(base)]);
    v /= static_cast<unsigned>(base);
  }
  return {out.rbegin(), out.rend()};
}

std::string format_int(std::int64_t v, const Spec& spec) {
  char type = spec.type;
  if (type == 'e' || type == 'E' || type == 'f' || type == 'F' || type == 'g' ||
      type == 'G' || type == '%') {
    return format_float(static_cast<double>(v), spec);
  }
  if (spec.precision >= 0) {
    throw ScriptFault("ValueError", "Precision not allowed in integer format specifier");
  }
  bool negative = v < 0;
  std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(v + 1)) + 1
                               : static_cast<std::uint64_t>(v);
  std::string body;
  std::string prefix;
  switch (type) {
    case 0:
    case 'd':
    case 'n': body = apply_grouping(to_base(mag, 10, false), spec.grouping); break;
    case 'x': body = to_base(mag, 16, false); prefix = spec.alternate ? "0x" : ""; break;
    case 'X': body = to_base(mag, 16, true); prefix = spec.alternate ? "0X" : ""; break;
    case 'o': body = to_base(mag, 8, false); prefix = spec.alternate ? "0o" : ""; break;
    case 'b': body = to_base(mag, 2, false); prefix = spec.alternate ? "0b" : ""; break;
    case 'c': body = std::string(1, static_cast<char>(v)); break;
    default:
      throw ScriptFault("ValueError", std::string("Unknown format code '") + type +
                                          "' for object of type 'int'");
  }
  return pad(sign_prefix(negative, spec) + prefix, body, spec, '>');
}

}  // namespace

std::string format_value(const Value& v, std::string_view spec_text) {
  if (spec_text.empty()) return str(v);
  Spec spec = parse_spec(spec_text);
  switch (v.kind()) {
    case Value::Kind::Int: return format_int(v.as_int(), spec);
    case Value::Kind::Bool:
      if (spec.type == 0) return pad("", str(v), spec, '<');
      return format_int(v.as_int(), spec);
    case Value::Kind::Float: return format_float(v.as_double(), spec);
    case Value::Kind::Str: {
      if (spec.type != 0 && spec.type != 's') {
        throw ScriptFault("ValueError", std::string("Unknown format code '") + spec.type +
                                            "' for object of type 'str'");
      }
      std::string body = v.as_str();
      if (spec.precision >= 0 && body.size() > static_cast<std::size_t>(spec.precision)) {
        body.resize(static_cast<std::size_t>(spec.precision));
      }
      return pad("", body, spec, '<');
    }
    case Value::Kind::None:
      if (spec.type == 0 && spec.precision < 0) return pad("", "None", spec, '<');
      [[fallthrough]];
    default:
      throw ScriptFault("TypeError", "unsupported format string passed to " + v.type_name() +
                                         ".__format__");
  }
}

std::string format_string(std::string_view fmt, const CallArgs& args) {
  std::string out;
  std::size_t auto_index = 0;
  std::size_t i = 0;
  while (i < fmt.size()) {
    char c = fmt[i];
    if (c == '{') {
      if (i + 1 < fmt.size() && fmt[i + 1] == '{') {
        out.push_back('{');
        i += 2;
        continue;
      }
      // find matching brace, allowing one level of nesting in the spec
      std::size_t depth = 1;
      std::size_t j = i + 1;
      while (j < fmt.size() && depth) {
        if (fmt[j] == '{') ++depth;
        if (fmt[j] == '}') --depth;
        if (depth) ++j;
      }
      if (j >= fmt.size()) throw ScriptFault("ValueError", "Single '{' encountered in format string");
      std::string_view field = fmt.substr(i + 1, j - i - 1);
      i = j + 1;

      std::string_view name = field;
      std::string_view spec;
      char conversion = 0;
      auto colon = field.find(':');
      auto bang = field.find('!');
      if (bang != std::string_view::npos && (colon == std::string_view::npos || bang < colon)) {
        name = field.substr(0, bang);
        if (bang + 1 >= field.size()) throw ScriptFault("ValueError", "end of string while looking for conversion specifier");
        conversion = field[bang + 1];
        if (colon != std::string_view::npos) spec = field.substr(colon + 1);
      } else if (colon != std::string_view::npos) {
        name = field.substr(0, colon);
        spec = field.substr(colon + 1);
      }

      // split off trailing [index] accessors
      std::string_view base = name;
      std::vector<std::string_view> accessors;
      auto bracket = name.find('[');
      if (bracket != std::string_view::npos) {
        base = name.substr(0, bracket);
        std::size_t k = bracket;
        while (k < name.size() && name[k] == '[') {
          auto close = name.find(']', k);
          if (close == std::string_view::npos) throw ScriptFault("ValueError", "Missing ']' in format string");
          accessors.push_back(name.substr(k + 1, close - k - 1));
          k = close + 1;
        }
      }

      Value value;
      if (base.empty()) {
        if (auto_index >= args.positional.size()) {
          throw ScriptFault("IndexError", "Replacement index " + std::to_string(auto_index) +
                                              " out of range for positional args tuple");
        }
        value = args.positional[auto_index++];
      } else if (std::isdigit(static_cast<unsigned char>(base[0]))) {
        std::size_t idx = std::strtoul(std::string(base).c_str(), nullptr, 10);
        if (idx >= args.positional.size()) {
          throw ScriptFault("IndexError", "Replacement index " + std::to_string(idx) +
                                              " out of range for positional args tuple");
        }
        value = args.positional[idx];
      } else {
        bool found = false;
        for (const auto& [k, v] : args.keywords) {
          if (k == base) {
            value = v;
            found = true;
            break;
          }
        }
        if (!found) throw ScriptFault("KeyError", "'" + std::string(base) + "'");
      }
      for (auto acc : accessors) {
        bool numeric = !acc.empty() && std::isdigit(static_cast<unsigned char>(acc[0]));
        if (value.is_list() || value.is_tuple()) {
          const auto& items = value.is_list() ? value.as_list().items : value.as_tuple().items;
          std::size_t idx = std::strtoul(std::string(acc).c_str(), nullptr, 10);
          if (!numeric || idx >= items.size()) throw ScriptFault("IndexError", "index out of range");
          value = items[idx];
        } else if (value.is_dict()) {
          DictKey key = numeric ? DictKey(static_cast<std::int64_t>(
                                      std::strtoll(std::string(acc).c_str(), nullptr, 10)))
                                : DictKey(std::string(acc));
          const Value* found = value.as_dict().find(key);
          if (!found) throw ScriptFault("KeyError", "'" + std::string(acc) + "'");
          value = *found;
        } else {
          throw ScriptFault("TypeError", "'" + value.type_name() + "' object is not subscriptable");
        }
      }

      if (conversion == 'r' || conversion == 'a') value = Value::string(repr(value));
      else if (conversion == 's') value = Value::string(str(value));
      else if (conversion != 0) throw ScriptFault("ValueError", std::string("Unknown conversion specifier ") + conversion);

      std::string resolved_spec(spec);
      if (resolved_spec.find('{') != std::string::npos) {
        CallArgs nested = args;
        resolved_spec = format_string(resolved_spec, nested);
      }
      out += format_value(value, resolved_spec);
    } else if (c == '}') {
      if (i + 1 < fmt.size() && fmt[i + 1] == '}') {
        out.push_back('}');
        i += 2;
        continue;
      }
      throw ScriptFault("ValueError", "Single '}' encountered in format string");
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::string percent_format(std::string_view fmt, const Value& args) {
  std::vector<Value> items;
  const DictObject* mapping = nullptr;
  if (args.is_tuple()) items = args.as_tuple().items;
  else if (args.is_dict()) mapping = &args.as_dict();
  else items.push_back(args);

  std::string out;
  std::size_t next = 0;
  std::size_t i = 0;
  while (i < fmt.size()) {
    if (fmt[i] != '%') {
      out.push_back(fmt[i++]);
      continue;
    }
    ++i;
    if (i >= fmt.size()) throw ScriptFault("ValueError", "incomplete format");
    if (fmt[i] == '%') {
      out.push_back('%');
      ++i;
      continue;
    }
    Value value;
    bool have_value = false;
    if (fmt[i] == '(') {
      auto close = fmt.find(')', i);
      if (close == std::string_view::npos || mapping == nullptr) {
        throw ScriptFault("TypeError", "format requires a mapping");
      }
      std::string key(fmt.substr(i + 1, close - i - 1));
      const Value* found = mapping->find(DictKey(key));
      if (!found) throw ScriptFault("KeyError", "'" + key + "'");
      value = *found;
      have_value = true;
      i = close + 1;
    }
    std::string flags;
    while (i < fmt.size() && std::string_view("-+ 0#").find(fmt[i]) != std::string_view::npos) {
      flags.push_back(fmt[i++]);
    }
    std::string width;
    while (i < fmt.size() && std::isdigit(static_cast<unsigned char>(fmt[i]))) width.push_back(fmt[i++]);
    std::string prec;
    if (i < fmt.size() && fmt[i] == '.') {
      prec = ".";
      ++i;
      while (i < fmt.size() && std::isdigit(static_cast<unsigned char>(fmt[i]))) prec.push_back(fmt[i++]);
    }
    if (i >= fmt.size()) throw ScriptFault("ValueError", "incomplete format");
    char conv = fmt[i++];
    if (!have_value) {
      if (next >= items.size()) throw ScriptFault("TypeError", "not enough arguments for format string");
      value = items[next++];
    }
    std::string cfmt = "%" + flags + width + prec;
    char buf[512];
    switch (conv) {
      case 's':
      case 'r': {
        std::string s = conv == 's' ? str(value) : repr(value);
        std::snprintf(buf, sizeof(buf), (cfmt + "s").c_str(), s.c_str());
        out += buf;
        break;
      }
      case 'd':
      case 'i':
      case 'x':
      case 'X':
      case 'o': {
        if (!value.is_numeric()) throw ScriptFault("TypeError", std::string("%") + conv + " format: a number is required, not " + value.type_name());
        long long n = value.is_float() ? static_cast<long long>(value.as_double()) : value.as_int();
        char c = conv == 'i' ? 'd' : conv;
        std::snprintf(buf, sizeof(buf), (cfmt + "ll" + c).c_str(), n);
        out += buf;
        break;
      }
      case 'f':
      case 'F':
      case 'e':
      case 'E':
      case 'g':
      case 'G': {
        if (!value.is_numeric()) throw ScriptFault("TypeError", "must be real number, not " + value.type_name());
        std::snprintf(buf, sizeof(buf), (cfmt + conv).c_str(), value.as_double());
        out += buf;
        break;
      }
      default:
        throw ScriptFault("ValueError", std::string("unsupported format character '") + conv + "'");
    }
  }
  if (!mapping && next < items.size()) {
    throw ScriptFault("TypeError", "not all arguments converted during string formatting");
  }
  return out;
}

double round_to_digits(double x, int ndigits) {
  if (!std::isfinite(x)) return x;
  if (ndigits >= 0) {
    if (ndigits > 300) return x;
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%.*f", ndigits, x);
    return std::strtod(buf, nullptr);
  }
  double scale = std::pow(10.0, -ndigits);
  int old = std::fegetround();
  std::fesetround(FE_TONEAREST);
  double r = std::nearbyint(x / scale) * scale;
  std::fesetround(old);
  return r;
}

}  // namespace pathagent::script
