// Builtin functions, builtin methods on str/list/dict/tuple, exceptions,
// file handles and the host-callable helpers declared in host.hpp.

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "internal.hpp"
#include "pathagent/script/format.hpp"
#include "pathagent/script/modules.hpp"

namespace fs = std::filesystem;

namespace pathagent::script {

// ---- host.hpp -------------------------------------------------------------

Value make_function(std::string name, HostFn fn) {
  return Value::callable(std::make_shared<HostFunction>(std::move(name), std::move(fn)));
}

Value make_exception_type(std::string name) {
  return Value::callable(std::make_shared<ExceptionType>(std::move(name)));
}

void raise_fault(std::string type, std::string message) {
  throw ScriptFault(std::move(type), std::move(message));
}

std::vector<std::optional<Value>> bind_arguments(std::string_view fname, const CallArgs& args,
                                                 std::initializer_list<std::string_view> names,
                                                 std::size_t required) {
  std::vector<std::string_view> list(names);
  std::vector<std::optional<Value>> out(list.size());
  std::string f(fname);
  if (args.positional.size() > list.size()) {
    raise_fault("TypeError", f + "() takes at most " + std::to_string(list.size()) +
                                 " argument" + (list.size() == 1 ? "" : "s") + " (" +
                                 std::to_string(args.positional.size()) + " given)");
  }
  for (std::size_t i = 0; i < args.positional.size(); ++i) out[i] = args.positional[i];
  for (const auto& [name, value] : args.keywords) {
    auto it = std::find(list.begin(), list.end(), name);
    if (it == list.end()) {
      raise_fault("TypeError", f + "() got an unexpected keyword argument '" + name + "'");
    }
    auto idx = static_cast<std::size_t>(it - list.begin());
    if (out[idx]) {
      raise_fault("TypeError", f + "() got multiple values for argument '" + name + "'");
    }
    out[idx] = value;
  }
  for (std::size_t i = 0; i < required && i < list.size(); ++i) {
    if (!out[i]) {
      raise_fault("TypeError", f + "() missing required argument '" + std::string(list[i]) +
                                   "' (pos " + std::to_string(i + 1) + ")");
    }
  }
  return out;
}

std::int64_t expect_int(const Value& v, std::string_view what) {
  if (v.is_int() || v.is_bool()) return v.as_int();
  if (v.is_float()) {
    raise_fault("TypeError", "'float' object cannot be interpreted as an integer");
  }
  raise_fault("TypeError", std::string(what) + " must be an integer, not '" + v.type_name() + "'");
}

double expect_number(const Value& v, std::string_view what) {
  if (v.is_numeric()) return v.as_double();
  raise_fault("TypeError", std::string(what) + " must be a real number, not '" + v.type_name() + "'");
}

const std::string& expect_str(const Value& v, std::string_view what) {
  if (v.is_str()) return v.as_str();
  raise_fault("TypeError", std::string(what) + " must be str, not " + v.type_name());
}

namespace {
[[noreturn]] void int_overflow() {
  raise_fault("OverflowError", "integer overflow (integers are limited to 64 bits)");
}
}  // namespace

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) int_overflow();
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) int_overflow();
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) int_overflow();
  return r;
}

std::optional<Value> ModuleObject::get_attr(Interpreter&, std::string_view attr) {
  for (const auto& [n, v] : attrs_) {
    if (n == attr) return v;
  }
  return std::nullopt;
}

// ---- small helpers --------------------------------------------------------

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

namespace {
std::size_t utf8_width(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}
}  // namespace

std::vector<std::string_view> utf8_chars(std::string_view s) {
  std::vector<std::string_view> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t w = std::min(utf8_width(static_cast<unsigned char>(s[i])), s.size() - i);
    out.push_back(s.substr(i, w));
    i += w;
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool normalize_index(std::int64_t& i, std::size_t size) {
  auto n = static_cast<std::int64_t>(size);
  if (i < 0) i += n;
  return i >= 0 && i < n;
}

SliceIndices resolve_slice(const Value& lower, const Value& upper, const Value& step,
                           std::size_t size) {
  auto as_index = [](const Value& v) {
    if (v.is_int() || v.is_bool()) return v.as_int();
    raise_fault("TypeError", "slice indices must be integers or None");
  };
  std::int64_t st = step.is_none() ? 1 : as_index(step);
  if (st == 0) raise_fault("ValueError", "slice step cannot be zero");
  auto n = static_cast<std::int64_t>(size);
  auto clamp = [&](const Value& v, std::int64_t dflt) {
    if (v.is_none()) return dflt;
    std::int64_t i = as_index(v);
    if (i < 0) {
      i += n;
      if (i < 0) i = st < 0 ? -1 : 0;
    } else if (i >= n) {
      i = st < 0 ? n - 1 : n;
    }
    return i;
  };
  std::int64_t start = clamp(lower, st < 0 ? n - 1 : 0);
  std::int64_t stop = clamp(upper, st < 0 ? -1 : n);
  std::size_t length = 0;
  if (st > 0 && stop > start) length = static_cast<std::size_t>((stop - start - 1) / st + 1);
  if (st < 0 && start > stop) length = static_cast<std::size_t>((start - stop - 1) / (-st) + 1);
  return {start, stop, st, length};
}

std::int64_t RangeObject::size() const {
  if (step > 0 && start < stop) return (stop - start - 1) / step + 1;
  if (step < 0 && start > stop) return (start - stop - 1) / (-step) + 1;
  return 0;
}

std::string RangeObject::repr() const {
  std::string out = "range(" + std::to_string(start) + ", " + std::to_string(stop);
  if (step != 1) out += ", " + std::to_string(step);
  return out + ")";
}

// ---- exceptions -----------------------------------------------------------

namespace {

const std::map<std::string, std::string, std::less<>>& exception_parents() {
  static const std::map<std::string, std::string, std::less<>> parents{
      {"Exception", "BaseException"},
      {"ArithmeticError", "Exception"},
      {"ZeroDivisionError", "ArithmeticError"},
      {"OverflowError", "ArithmeticError"},
      {"LookupError", "Exception"},
      {"IndexError", "LookupError"},
      {"KeyError", "LookupError"},
      {"ValueError", "Exception"},
      {"JSONDecodeError", "ValueError"},
      {"UnicodeDecodeError", "ValueError"},
      {"StatisticsError", "ValueError"},
      {"TypeError", "Exception"},
      {"NameError", "Exception"},
      {"AttributeError", "Exception"},
      {"AssertionError", "Exception"},
      {"RuntimeError", "Exception"},
      {"RecursionError", "RuntimeError"},
      {"NotImplementedError", "RuntimeError"},
      {"StopIteration", "Exception"},
      {"MemoryError", "Exception"},
      {"ImportError", "Exception"},
      {"ModuleNotFoundError", "ImportError"},
      {"OSError", "Exception"},
      {"FileNotFoundError", "OSError"},
      {"FileExistsError", "OSError"},
      {"IsADirectoryError", "OSError"},
      {"NotADirectoryError", "OSError"},
      {"PermissionError", "OSError"},
      {"UnsupportedOperation", "OSError"},
      {"SyntaxError", "Exception"},
  };
  return parents;
}

std::string_view canonical_exception(std::string_view name) {
  if (name == "IOError" || name == "EnvironmentError") return "OSError";
  return name;
}

}  // namespace

bool exception_matches(std::string_view fault, std::string_view handler) {
  handler = canonical_exception(handler);
  if (handler == "BaseException") return true;
  std::string_view cur = fault;
  const auto& parents = exception_parents();
  for (int guard = 0; guard < 16; ++guard) {
    if (cur == handler) return true;
    if (cur == "UnsupportedOperation" && handler == "ValueError") return true;
    auto it = parents.find(cur);
    if (it == parents.end()) {
      // Unknown fault types still derive from Exception.
      return handler == "Exception";
    }
    cur = it->second;
  }
  return false;
}

Value ExceptionType::call(Interpreter&, CallArgs args) {
  std::string message;
  if (args.positional.size() == 1) {
    message = str(args.positional[0]);
  } else if (args.positional.size() > 1) {
    message = repr(Value::tuple(args.positional));
  }
  return Value::object(std::make_shared<ExceptionObject>(name_, std::move(message)));
}

std::optional<Value> ExceptionObject::get_attr(Interpreter&, std::string_view attr) {
  if (attr == "args") {
    if (message_.empty()) return Value::tuple();
    return Value::tuple({Value::string(message_)});
  }
  return std::nullopt;
}

std::string ExceptionObject::repr() const {
  if (message_.empty()) return type_ + "()";
  // KeyError messages already hold repr(key), as str(KeyError) does in Python
  if (type_ == "KeyError") return type_ + "(" + message_ + ")";
  return type_ + "(" + script::repr(Value::string(message_)) + ")";
}

// ---- files ----------------------------------------------------------------

namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t w = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (w == 0 || i + w > s.size()) return false;
    for (std::size_t k = 1; k < w; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += w;
  }
  return true;
}

std::string py_quoted(const std::string& s) { return repr(Value::string(s)); }

}  // namespace

FileHandle::FileHandle(fs::path path, std::string display, char mode)
    : path_(std::move(path)), display_(std::move(display)), mode_(mode) {
  std::error_code ec;
  if (mode_ == 'r') {
    if (fs::is_directory(path_, ec)) {
      raise_fault("IsADirectoryError", "[Errno 21] Is a directory: " + py_quoted(display_));
    }
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
      raise_fault("FileNotFoundError", "[Errno 2] No such file or directory: " + py_quoted(display_));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    content_ = ss.str();
    if (!valid_utf8(content_)) {
      raise_fault("UnicodeDecodeError", "'utf-8' codec can't decode file " + py_quoted(display_));
    }
    return;
  }
  if (fs::is_directory(path_, ec)) {
    raise_fault("IsADirectoryError", "[Errno 21] Is a directory: " + py_quoted(display_));
  }
  out_.open(path_, mode_ == 'a' ? std::ios::binary | std::ios::app
                                : std::ios::binary | std::ios::trunc);
  if (!out_) {
    raise_fault("FileNotFoundError", "[Errno 2] No such file or directory: " + py_quoted(display_));
  }
}

void FileHandle::ensure_open() const {
  if (closed_) raise_fault("ValueError", "I/O operation on closed file.");
}

std::string FileHandle::read_all() {
  ensure_open();
  if (mode_ != 'r') raise_fault("UnsupportedOperation", "not readable");
  std::string out = content_.substr(read_pos_);
  read_pos_ = content_.size();
  return out;
}

std::vector<std::string> FileHandle::read_lines() {
  ensure_open();
  if (mode_ != 'r') raise_fault("UnsupportedOperation", "not readable");
  std::vector<std::string> out;
  while (read_pos_ < content_.size()) {
    auto nl = content_.find('\n', read_pos_);
    std::size_t end = nl == std::string::npos ? content_.size() : nl + 1;
    out.push_back(content_.substr(read_pos_, end - read_pos_));
    read_pos_ = end;
  }
  return out;
}

void FileHandle::write(const std::string& s) {
  ensure_open();
  if (mode_ == 'r') raise_fault("UnsupportedOperation", "not writable");
  out_ << s;
  out_.flush();
}

void FileHandle::close() {
  if (closed_) return;
  closed_ = true;
  if (out_.is_open()) out_.close();
}

std::string FileHandle::repr() const {
  std::string m = mode_ == 'r' ? "r" : mode_ == 'w' ? "w" : "a";
  return "<_io.TextIOWrapper name=" + py_quoted(display_) + " mode='" + m + "' encoding='UTF-8'>";
}

std::optional<Value> FileHandle::get_attr(Interpreter&, std::string_view attr) {
  auto self = this;
  auto method = [&](std::string name, HostFn fn) { return make_function(std::move(name), std::move(fn)); };
  if (attr == "closed") return Value::boolean(closed_);
  if (attr == "name") return Value::string(display_);
  if (attr == "mode") return Value::string(std::string(1, mode_));
  if (attr == "read") {
    return method("read", [self](Interpreter&, CallArgs& a) {
      auto p = bind_arguments("read", a, {"size"}, 0);
      std::string all = self->read_all();
      if (p[0] && !p[0]->is_none()) {
        auto n = expect_int(*p[0], "size");
        if (n >= 0) {
          auto chars = utf8_chars(all);
          if (static_cast<std::size_t>(n) < chars.size()) {
            std::size_t bytes = 0;
            for (std::int64_t i = 0; i < n; ++i) bytes += chars[static_cast<std::size_t>(i)].size();
            self->read_pos_ -= all.size() - bytes;
            all.resize(bytes);
          }
        }
      }
      return Value::string(std::move(all));
    });
  }
  if (attr == "readline") {
    return method("readline", [self](Interpreter&, CallArgs& a) {
      bind_arguments("readline", a, {}, 0);
      self->ensure_open();
      if (self->mode_ != 'r') raise_fault("UnsupportedOperation", "not readable");
      const auto& c = self->content_;
      if (self->read_pos_ >= c.size()) return Value::string("");
      auto nl = c.find('\n', self->read_pos_);
      std::size_t end = nl == std::string::npos ? c.size() : nl + 1;
      std::string line = c.substr(self->read_pos_, end - self->read_pos_);
      self->read_pos_ = end;
      return Value::string(std::move(line));
    });
  }
  if (attr == "readlines") {
    return method("readlines", [self](Interpreter&, CallArgs& a) {
      bind_arguments("readlines", a, {}, 0);
      std::vector<Value> out;
      for (auto& l : self->read_lines()) out.push_back(Value::string(std::move(l)));
      return Value::list(std::move(out));
    });
  }
  if (attr == "write") {
    return method("write", [self](Interpreter&, CallArgs& a) {
      auto p = bind_arguments("write", a, {"s"}, 1);
      if (!p[0]->is_str()) {
        raise_fault("TypeError", "write() argument must be str, not " + p[0]->type_name());
      }
      self->write(p[0]->as_str());
      return Value::integer(static_cast<std::int64_t>(utf8_length(p[0]->as_str())));
    });
  }
  if (attr == "writelines") {
    return method("writelines", [self](Interpreter& in, CallArgs& a) {
      auto p = bind_arguments("writelines", a, {"lines"}, 1);
      in.iterate(*p[0], [&](const Value& v) {
        if (!v.is_str()) raise_fault("TypeError", "write() argument must be str, not " + v.type_name());
        self->write(v.as_str());
        return true;
      });
      return Value::none();
    });
  }
  if (attr == "close") {
    return method("close", [self](Interpreter&, CallArgs& a) {
      bind_arguments("close", a, {}, 0);
      self->close();
      return Value::none();
    });
  }
  if (attr == "flush") {
    return method("flush", [self](Interpreter&, CallArgs&) {
      self->ensure_open();
      return Value::none();
    });
  }
  return std::nullopt;
}

Value builtin_open(Interpreter& interp, CallArgs& args) {
  auto p = bind_arguments("open", args, {"file", "mode", "encoding", "newline", "errors"}, 1);
  std::string display;
  if (auto ps = path_string(*p[0])) {
    display = *ps;
  } else if (p[0]->is_str()) {
    display = p[0]->as_str();
  } else {
    raise_fault("TypeError", "expected str or Path, not " + p[0]->type_name());
  }
  std::string mode = p[1] && !p[1]->is_none() ? expect_str(*p[1], "mode") : "r";
  if (p[2] && !p[2]->is_none()) {
    std::string enc = expect_str(*p[2], "encoding");
    std::transform(enc.begin(), enc.end(), enc.begin(), [](unsigned char c) { return std::tolower(c); });
    if (enc != "utf-8" && enc != "utf8" && enc != "ascii") {
      raise_fault("ValueError", "unsupported encoding: " + enc);
    }
  }
  std::string base = mode;
  base.erase(std::remove(base.begin(), base.end(), 't'), base.end());
  if (base != "r" && base != "w" && base != "a") {
    raise_fault("ValueError", "invalid mode: '" + mode + "' (only text modes r, w and a are supported)");
  }
  char m = base[0];
  fs::path resolved = interp.sandbox().resolve(display, m == 'r' ? Access::Read : Access::Write);
  auto handle = std::make_shared<FileHandle>(resolved, display, m);
  if (m != 'r') interp.sandbox().record_write(resolved);
  interp.track_handle(handle);
  return Value::object(handle);
}

// ---- sorting --------------------------------------------------------------

namespace {

/// Stable merge sort that tolerates comparators that throw or are not a
/// strict weak order (NaN).
void merge_sort(std::vector<std::size_t>& idx, const std::function<bool(std::size_t, std::size_t)>& less) {
  std::vector<std::size_t> tmp(idx.size());
  for (std::size_t width = 1; width < idx.size(); width *= 2) {
    for (std::size_t lo = 0; lo < idx.size(); lo += 2 * width) {
      std::size_t mid = std::min(lo + width, idx.size());
      std::size_t hi = std::min(lo + 2 * width, idx.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) tmp[k++] = less(idx[j], idx[i]) ? idx[j++] : idx[i++];
      while (i < mid) tmp[k++] = idx[i++];
      while (j < hi) tmp[k++] = idx[j++];
    }
    idx.swap(tmp);
  }
}

std::vector<Value> sort_values(Interpreter& in, std::vector<Value> items, const Value& key, bool reverse) {
  std::vector<Value> keys;
  if (key.is_none()) {
    keys = items;
  } else {
    keys.reserve(items.size());
    for (const auto& v : items) keys.push_back(in.call(key, CallArgs{{v}, {}}));
  }
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  merge_sort(idx, [&](std::size_t a, std::size_t b) {
    return reverse ? less_than(keys[b], keys[a]) : less_than(keys[a], keys[b]);
  });
  std::vector<Value> out;
  out.reserve(items.size());
  for (auto i : idx) out.push_back(std::move(items[i]));
  return out;
}

// ---- conversions ----------------------------------------------------------

std::string strip_ws(std::string_view s) {
  auto b = s.find_first_not_of(" \t\n\r\f\v");
  if (b == std::string_view::npos) return "";
  auto e = s.find_last_not_of(" \t\n\r\f\v");
  return std::string(s.substr(b, e - b + 1));
}

std::int64_t parse_int(const std::string& text, std::int64_t base) {
  std::string s = strip_ws(text);
  auto fail = [&]() {
    raise_fault("ValueError", "invalid literal for int() with base " + std::to_string(base) + ": " +
                                  py_quoted(text));
  };
  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  if (base == 0 || base == 16 || base == 8 || base == 2) {
    if (i + 1 < s.size() && s[i] == '0') {
      char p = static_cast<char>(std::tolower(s[i + 1]));
      std::int64_t pb = p == 'x' ? 16 : p == 'o' ? 8 : p == 'b' ? 2 : 0;
      if (pb && (base == 0 || base == pb)) {
        base = pb;
        i += 2;
        if (i < s.size() && s[i] == '_') ++i;
      }
    }
    if (base == 0) base = 10;
  }
  if (i >= s.size()) fail();
  std::uint64_t acc = 0;
  bool prev_us = true;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '_') {
      if (prev_us) fail();
      prev_us = true;
      continue;
    }
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'z') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'Z') d = c - 'A' + 10;
    else fail();
    if (d >= base) fail();
    prev_us = false;
    if (acc > (static_cast<std::uint64_t>(INT64_MAX) + 1 - static_cast<std::uint64_t>(d)) /
                  static_cast<std::uint64_t>(base)) {
      int_overflow();
    }
    acc = acc * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
  }
  if (prev_us) fail();
  if (!neg && acc > static_cast<std::uint64_t>(INT64_MAX)) int_overflow();
  return neg ? static_cast<std::int64_t>(0 - acc) : static_cast<std::int64_t>(acc);
}

std::int64_t float_to_int(double d) {
  if (std::isnan(d)) raise_fault("ValueError", "cannot convert float NaN to integer");
  if (std::isinf(d)) raise_fault("OverflowError", "cannot convert float infinity to integer");
  double t = std::trunc(d);
  if (t >= 9223372036854775808.0 || t < -9223372036854775808.0) int_overflow();
  return static_cast<std::int64_t>(t);
}

double parse_float(const std::string& text) {
  std::string s = strip_ws(text);
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::string body = lower;
  double sign = 1.0;
  if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
    sign = body[0] == '-' ? -1.0 : 1.0;
    body = body.substr(1);
  }
  if (body == "inf" || body == "infinity") return sign * HUGE_VAL;
  if (body == "nan") return std::nan("");
  std::string cleaned;
  bool ok = !s.empty();
  char prev = 0;
  for (char c : s) {
    if (c == '_') {
      if (!std::isdigit(static_cast<unsigned char>(prev))) ok = false;
    } else {
      if (prev == '_' && !std::isdigit(static_cast<unsigned char>(c))) ok = false;
      if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' ||
            c == '+' || c == '-')) {
        ok = false;
      }
      cleaned += c;
    }
    prev = c;
  }
  if (prev == '_') ok = false;
  if (ok) {
    char* end = nullptr;
    double v = std::strtod(cleaned.c_str(), &end);
    if (end == cleaned.c_str() + cleaned.size() && !cleaned.empty()) return v;
  }
  raise_fault("ValueError", "could not convert string to float: " + py_quoted(text));
}

double round_half_even(double x) {
  double r = std::round(x);
  if (std::fabs(x - std::trunc(x)) == 0.5) r = 2.0 * std::round(x / 2.0);
  return r;
}

std::string to_base_prefixed(std::int64_t v, int base, const char* prefix) {
  bool neg = v < 0;
  std::uint64_t u = neg ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
  std::string digits;
  do {
    digits += "0123456789abcdef"[u % static_cast<std::uint64_t>(base)];
    u /= static_cast<std::uint64_t>(base);
  } while (u);
  std::reverse(digits.begin(), digits.end());
  return (neg ? "-" : "") + std::string(prefix) + digits;
}

std::string encode_utf8(std::int64_t cp) {
  if (cp < 0 || cp > 0x10FFFF) raise_fault("ValueError", "chr() arg not in range(0x110000)");
  std::string out;
  auto c = static_cast<std::uint32_t>(cp);
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
  return out;
}

std::int64_t decode_utf8(std::string_view ch) {
  auto b0 = static_cast<unsigned char>(ch[0]);
  if (ch.size() == 1) return b0;
  std::uint32_t cp = b0 & (0xFF >> (ch.size() + 1));
  for (std::size_t i = 1; i < ch.size(); ++i) cp = (cp << 6) | (static_cast<unsigned char>(ch[i]) & 0x3F);
  return cp;
}

Value make_iterator(std::vector<Value> items) {
  return Value::object(std::make_shared<IteratorObject>(std::move(items)));
}

std::size_t value_length(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Str: return utf8_length(v.as_str());
    case Value::Kind::List: return v.as_list().items.size();
    case Value::Kind::Tuple: return v.as_tuple().items.size();
    case Value::Kind::Dict: return v.as_dict().size();
    case Value::Kind::Object:
      if (auto* r = dynamic_cast<RangeObject*>(v.as_object().get())) {
        return static_cast<std::size_t>(r->size());
      }
      break;
    default: break;
  }
  raise_fault("TypeError", "object of type '" + v.type_name() + "' has no len()");
}

/// Name used by isinstance() for a value.
bool instance_of(const Value& v, const Value& cls) {
  if (cls.is_tuple()) {
    return std::any_of(cls.as_tuple().items.begin(), cls.as_tuple().items.end(),
                       [&](const Value& c) { return instance_of(v, c); });
  }
  if (!cls.is_callable() || cls.as_callable()->kind() != "class") {
    raise_fault("TypeError", "isinstance() arg 2 must be a type or tuple of types");
  }
  std::string_view name = cls.as_callable()->name();
  if (dynamic_cast<ExceptionType*>(cls.as_callable().get())) {
    if (!v.is_object()) return false;
    auto* e = dynamic_cast<ExceptionObject*>(v.as_object().get());
    return e && exception_matches(e->type_name(), name);
  }
  std::string tn = v.type_name();
  if (name == "int" && v.is_bool()) return true;
  if (name == "Path" && path_string(v)) return true;
  if (name == "object") return true;
  return tn == name;
}

std::vector<Value> flatten_args(Interpreter& in, const CallArgs& args, const char* fname) {
  if (args.positional.empty()) {
    raise_fault("TypeError", std::string(fname) + " expected at least 1 argument, got 0");
  }
  if (args.positional.size() == 1) return in.to_vector(args.positional[0]);
  return args.positional;
}

Value min_max(Interpreter& in, CallArgs& args, bool is_max) {
  const char* fname = is_max ? "max" : "min";
  Value key, dflt;
  bool has_default = false;
  for (auto& [name, v] : args.keywords) {
    if (name == "key") key = v;
    else if (name == "default") {
      dflt = v;
      has_default = true;
    } else {
      raise_fault("TypeError", std::string(fname) + "() got an unexpected keyword argument '" + name + "'");
    }
  }
  if (has_default && args.positional.size() > 1) {
    raise_fault("TypeError", std::string("Cannot specify a default for ") + fname +
                                 "() with multiple positional arguments");
  }
  auto items = flatten_args(in, args, fname);
  if (items.empty()) {
    if (has_default) return dflt;
    raise_fault("ValueError", std::string(fname) + "() arg is an empty sequence");
  }
  std::size_t best = 0;
  Value best_key = key.is_none() ? items[0] : in.call(key, CallArgs{{items[0]}, {}});
  for (std::size_t i = 1; i < items.size(); ++i) {
    Value k = key.is_none() ? items[i] : in.call(key, CallArgs{{items[i]}, {}});
    bool better = is_max ? less_than(best_key, k) : less_than(k, best_key);
    if (better) {
      best = i;
      best_key = std::move(k);
    }
  }
  return items[best];
}

Value round_value(const Value& x, const std::optional<Value>& nd) {
  if (!x.is_numeric()) {
    raise_fault("TypeError", "type " + x.type_name() + " doesn't define __round__ method");
  }
  if (!nd || nd->is_none()) {
    if (!x.is_float()) return Value::integer(x.as_int());
    return Value::integer(float_to_int(round_half_even(x.as_double())));
  }
  std::int64_t n = expect_int(*nd, "ndigits");
  if (x.is_float()) {
    return Value::number(round_to_digits(x.as_double(), static_cast<int>(std::clamp<std::int64_t>(n, -400, 400))));
  }
  std::int64_t v = x.as_int();
  if (n >= 0) return Value::integer(v);
  if (n < -18) return Value::integer(0);
  std::int64_t p = 1;
  for (std::int64_t i = 0; i < -n; ++i) p *= 10;
  std::int64_t q = v / p, r = v % p;
  if (r < 0) {
    r += p;
    --q;
  }
  if (2 * r > p || (2 * r == p && (q & 1))) ++q;
  return Value::integer(checked_mul(q, p));
}

Value sum_values(Interpreter& in, const std::vector<Value>& items, Value acc) {
  for (const auto& v : items) {
    if (acc.is_numeric() && v.is_numeric()) {
      if (acc.is_float() || v.is_float()) {
        acc = Value::number(acc.as_double() + v.as_double());
      } else {
        acc = Value::integer(checked_add(acc.as_int(), v.as_int()));
      }
    } else if (acc.is_list() && v.is_list()) {
      std::vector<Value> out = acc.as_list().items;
      out.insert(out.end(), v.as_list().items.begin(), v.as_list().items.end());
      in.check_length(out.size());
      acc = Value::list(std::move(out));
    } else if (acc.is_tuple() && v.is_tuple()) {
      std::vector<Value> out = acc.as_tuple().items;
      out.insert(out.end(), v.as_tuple().items.begin(), v.as_tuple().items.end());
      in.check_length(out.size());
      acc = Value::tuple(std::move(out));
    } else {
      raise_fault("TypeError", "unsupported operand type(s) for +: '" + acc.type_name() + "' and '" +
                                   v.type_name() + "'");
    }
  }
  return acc;
}

Value dict_from(Interpreter& in, CallArgs& args) {
  if (args.positional.size() > 1) {
    raise_fault("TypeError", "dict expected at most 1 argument, got " +
                                 std::to_string(args.positional.size()));
  }
  auto d = std::make_shared<DictObject>();
  auto put = [&](const Value& k, const Value& v) {
    auto key = to_dict_key(k);
    if (!key) raise_fault("TypeError", "unhashable or unsupported key type: '" + k.type_name() + "'");
    d->set(*key, v);
  };
  if (!args.positional.empty()) {
    const Value& src = args.positional[0];
    if (src.is_dict()) {
      for (const auto& [k, v] : src.as_dict().entries()) put(k, v);
    } else {
      std::size_t idx = 0;
      in.iterate(src, [&](const Value& pair) {
        auto kv = in.to_vector(pair);
        if (kv.size() != 2) {
          raise_fault("ValueError", "dictionary update sequence element #" + std::to_string(idx) +
                                        " has length " + std::to_string(kv.size()) + "; 2 is required");
        }
        put(kv[0], kv[1]);
        ++idx;
        return true;
      });
    }
  }
  for (auto& [name, v] : args.keywords) d->set(name, v);
  return Value::dict(std::move(d));
}

// ---- builtin table --------------------------------------------------------

using Table = std::map<std::string, Value, std::less<>>;

void add(Table& t, const std::string& name, HostFn fn) { t[name] = make_function(name, std::move(fn)); }

void add_type(Table& t, const std::string& name, HostFn fn) {
  t[name] = Value::callable(std::make_shared<TypeObject>(name, std::move(fn)));
}

Table build_builtins() {
  Table t;

  add(t, "print", [](Interpreter& in, CallArgs& a) {
    std::string sep = " ", end = "\n";
    for (auto& [name, v] : a.keywords) {
      if (name == "sep") {
        if (!v.is_none()) sep = expect_str(v, "sep");
      } else if (name == "end") {
        if (!v.is_none()) end = expect_str(v, "end");
      } else if (name == "flush") {
      } else if (name == "file") {
        if (!v.is_none()) raise_fault("TypeError", "print(file=...) is not supported; use f.write()");
      } else {
        raise_fault("TypeError", "print() got an unexpected keyword argument '" + name + "'");
      }
    }
    std::string out;
    for (std::size_t i = 0; i < a.positional.size(); ++i) {
      if (i) out += sep;
      out += str(a.positional[i]);
      in.check_string(out.size());
    }
    out += end;
    in.write_stdout(out);
    return Value::none();
  });

  add(t, "len", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("len", a, {"obj"}, 1);
    return Value::integer(static_cast<std::int64_t>(value_length(*p[0])));
  });

  add_type(t, "range", [](Interpreter&, CallArgs& a) {
    if (!a.keywords.empty()) raise_fault("TypeError", "range() takes no keyword arguments");
    auto n = a.positional.size();
    if (n == 0 || n > 3) {
      raise_fault("TypeError", "range expected 1 to 3 arguments, got " + std::to_string(n));
    }
    std::int64_t start = 0, stop, step = 1;
    if (n == 1) {
      stop = expect_int(a.positional[0], "range() argument");
    } else {
      start = expect_int(a.positional[0], "range() argument");
      stop = expect_int(a.positional[1], "range() argument");
      if (n == 3) step = expect_int(a.positional[2], "range() argument");
    }
    if (step == 0) raise_fault("ValueError", "range() arg 3 must not be zero");
    // Keep size() computations inside int64.
    if ((stop > 0 && start < 0 && stop - INT64_MAX > start) ||
        (stop < 0 && start > 0 && start - INT64_MAX > stop)) {
      int_overflow();
    }
    return Value::object(std::make_shared<RangeObject>(start, stop, step));
  });

  add(t, "min", [](Interpreter& in, CallArgs& a) { return min_max(in, a, false); });
  add(t, "max", [](Interpreter& in, CallArgs& a) { return min_max(in, a, true); });

  add(t, "sum", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("sum", a, {"iterable", "start"}, 1);
    Value start = p[1] ? *p[1] : Value::integer(0);
    if (start.is_str()) raise_fault("TypeError", "sum() can't sum strings [use ''.join(seq) instead]");
    return sum_values(in, in.to_vector(*p[0]), start);
  });

  add(t, "sorted", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("sorted", a, {"iterable", "key", "reverse"}, 1);
    if (a.positional.size() > 1) raise_fault("TypeError", "sorted expected 1 argument, got " + std::to_string(a.positional.size()));
    bool reverse = p[2] && truthy(*p[2]);
    return Value::list(sort_values(in, in.to_vector(*p[0]), p[1] ? *p[1] : Value::none(), reverse));
  });

  add(t, "abs", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("abs", a, {"x"}, 1);
    const Value& x = *p[0];
    if (x.is_float()) return Value::number(std::fabs(x.as_double()));
    if (x.is_numeric()) {
      std::int64_t v = x.as_int();
      return Value::integer(v < 0 ? checked_sub(0, v) : v);
    }
    raise_fault("TypeError", "bad operand type for abs(): '" + x.type_name() + "'");
  });

  add(t, "round", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("round", a, {"number", "ndigits"}, 1);
    return round_value(*p[0], p[1]);
  });

  add(t, "enumerate", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("enumerate", a, {"iterable", "start"}, 1);
    std::int64_t i = p[1] ? expect_int(*p[1], "start") : 0;
    std::vector<Value> out;
    in.iterate(*p[0], [&](const Value& v) {
      out.push_back(Value::tuple({Value::integer(i), v}));
      i = checked_add(i, 1);
      return true;
    });
    return make_iterator(std::move(out));
  });

  add(t, "zip", [](Interpreter& in, CallArgs& a) {
    bool strict = false;
    for (auto& [name, v] : a.keywords) {
      if (name != "strict") raise_fault("TypeError", "zip() got an unexpected keyword argument '" + name + "'");
      strict = truthy(v);
    }
    std::vector<std::vector<Value>> cols;
    for (const auto& it : a.positional) cols.push_back(in.to_vector(it));
    std::vector<Value> out;
    if (cols.empty()) return make_iterator({});
    std::size_t n = cols[0].size();
    for (const auto& c : cols) {
      if (strict && c.size() != n) raise_fault("ValueError", "zip() arguments have different lengths");
      n = std::min(n, c.size());
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Value> row;
      for (const auto& c : cols) row.push_back(c[i]);
      out.push_back(Value::tuple(std::move(row)));
    }
    return make_iterator(std::move(out));
  });

  add_type(t, "str", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("str", a, {"object"}, 0);
    return Value::string(p[0] ? str(*p[0]) : "");
  });

  add_type(t, "int", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("int", a, {"x", "base"}, 0);
    if (!p[0]) return Value::integer(0);
    const Value& x = *p[0];
    if (p[1]) {
      if (!x.is_str()) raise_fault("TypeError", "int() can't convert non-string with explicit base");
      std::int64_t base = expect_int(*p[1], "base");
      if (base != 0 && (base < 2 || base > 36)) raise_fault("ValueError", "int() base must be >= 2 and <= 36, or 0");
      return Value::integer(parse_int(x.as_str(), base));
    }
    if (x.is_str()) return Value::integer(parse_int(x.as_str(), 10));
    if (x.is_float()) return Value::integer(float_to_int(x.as_double()));
    if (x.is_numeric()) return Value::integer(x.as_int());
    raise_fault("TypeError", "int() argument must be a string, a bytes-like object or a real number, not '" +
                                 x.type_name() + "'");
  });

  add_type(t, "float", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("float", a, {"x"}, 0);
    if (!p[0]) return Value::number(0.0);
    const Value& x = *p[0];
    if (x.is_str()) return Value::number(parse_float(x.as_str()));
    if (x.is_numeric()) return Value::number(x.as_double());
    raise_fault("TypeError", "float() argument must be a string or a real number, not '" + x.type_name() + "'");
  });

  add_type(t, "bool", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("bool", a, {"x"}, 0);
    return Value::boolean(p[0] && truthy(*p[0]));
  });

  add_type(t, "list", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("list", a, {"iterable"}, 0);
    return Value::list(p[0] ? in.to_vector(*p[0]) : std::vector<Value>{});
  });

  add_type(t, "tuple", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("tuple", a, {"iterable"}, 0);
    if (p[0] && p[0]->is_tuple()) return *p[0];
    return Value::tuple(p[0] ? in.to_vector(*p[0]) : std::vector<Value>{});
  });

  add_type(t, "dict", [](Interpreter& in, CallArgs& a) { return dict_from(in, a); });

  add_type(t, "set", [](Interpreter&, CallArgs&) -> Value {
    raise_fault("TypeError", "sets are not supported in this environment; use a dict or a list");
  });

  add_type(t, "object", [](Interpreter&, CallArgs&) -> Value {
    raise_fault("TypeError", "object() cannot be instantiated here");
  });

  add(t, "isinstance", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("isinstance", a, {"obj", "class_or_tuple"}, 2);
    return Value::boolean(instance_of(*p[0], *p[1]));
  });

  add(t, "type", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("type", a, {"object"}, 1);
    const auto& table = builtin_table();
    std::string tn = p[0]->type_name();
    if (auto it = table.find(tn); it != table.end() && it->second.is_callable() &&
                                  it->second.as_callable()->kind() == "class") {
      return it->second;
    }
    return Value::callable(std::make_shared<TypeObject>(tn, [tn](Interpreter&, CallArgs&) -> Value {
      raise_fault("TypeError", "cannot create '" + tn + "' instances");
    }));
  });

  add(t, "repr", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("repr", a, {"obj"}, 1);
    return Value::string(repr(*p[0]));
  });

  add(t, "ascii", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("ascii", a, {"obj"}, 1);
    return Value::string(repr(*p[0]));
  });

  add(t, "format", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("format", a, {"value", "format_spec"}, 1);
    return Value::string(format_value(*p[0], p[1] ? expect_str(*p[1], "format_spec") : ""));
  });

  add(t, "any", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("any", a, {"iterable"}, 1);
    bool r = false;
    in.iterate(*p[0], [&](const Value& v) {
      r = truthy(v);
      return !r;
    });
    return Value::boolean(r);
  });

  add(t, "all", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("all", a, {"iterable"}, 1);
    bool r = true;
    in.iterate(*p[0], [&](const Value& v) {
      r = truthy(v);
      return r;
    });
    return Value::boolean(r);
  });

  add(t, "map", [](Interpreter& in, CallArgs& a) {
    if (a.positional.size() < 2) raise_fault("TypeError", "map() must have at least two arguments.");
    std::vector<std::vector<Value>> cols;
    for (std::size_t i = 1; i < a.positional.size(); ++i) cols.push_back(in.to_vector(a.positional[i]));
    std::size_t n = cols[0].size();
    for (const auto& c : cols) n = std::min(n, c.size());
    std::vector<Value> out;
    for (std::size_t i = 0; i < n; ++i) {
      CallArgs ca;
      for (const auto& c : cols) ca.positional.push_back(c[i]);
      out.push_back(in.call(a.positional[0], std::move(ca)));
    }
    return make_iterator(std::move(out));
  });

  add(t, "filter", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("filter", a, {"function", "iterable"}, 2);
    std::vector<Value> out;
    in.iterate(*p[1], [&](const Value& v) {
      bool keep = p[0]->is_none() ? truthy(v) : truthy(in.call(*p[0], CallArgs{{v}, {}}));
      if (keep) out.push_back(v);
      return true;
    });
    return make_iterator(std::move(out));
  });

  add(t, "reversed", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("reversed", a, {"sequence"}, 1);
    if (p[0]->is_dict()) raise_fault("TypeError", "'dict' object is not reversible");
    auto items = in.to_vector(*p[0]);
    std::reverse(items.begin(), items.end());
    return make_iterator(std::move(items));
  });

  add(t, "iter", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("iter", a, {"object"}, 1);
    if (p[0]->is_object() && dynamic_cast<IteratorObject*>(p[0]->as_object().get())) return *p[0];
    return make_iterator(in.to_vector(*p[0]));
  });

  add(t, "next", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("next", a, {"iterator", "default"}, 1);
    IteratorObject* it = p[0]->is_object() ? dynamic_cast<IteratorObject*>(p[0]->as_object().get()) : nullptr;
    if (!it) raise_fault("TypeError", "'" + p[0]->type_name() + "' object is not an iterator");
    if (it->pos < it->items.size()) return it->items[it->pos++];
    if (p[1]) return *p[1];
    raise_fault("StopIteration", "");
  });

  add(t, "divmod", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("divmod", a, {"a", "b"}, 2);
    const Value &x = *p[0], &y = *p[1];
    if (!x.is_numeric() || !y.is_numeric()) {
      raise_fault("TypeError", "unsupported operand type(s) for divmod(): '" + x.type_name() + "' and '" +
                                   y.type_name() + "'");
    }
    if (x.is_float() || y.is_float()) {
      double a1 = x.as_double(), b1 = y.as_double();
      if (b1 == 0.0) raise_fault("ZeroDivisionError", "float divmod()");
      double mod = std::fmod(a1, b1);
      double div = (a1 - mod) / b1;
      if (mod != 0.0 && ((b1 < 0) != (mod < 0))) {
        mod += b1;
        div -= 1.0;
      }
      if (mod == 0.0) mod = std::copysign(0.0, b1);
      double fd = div != 0.0 ? std::floor(div) : std::copysign(0.0, a1 / b1);
      if (div != 0.0 && div - fd > 0.5) fd += 1.0;
      return Value::tuple({Value::number(fd), Value::number(mod)});
    }
    std::int64_t a1 = x.as_int(), b1 = y.as_int();
    if (b1 == 0) raise_fault("ZeroDivisionError", "integer division or modulo by zero");
    if (a1 == INT64_MIN && b1 == -1) int_overflow();
    std::int64_t q = a1 / b1, r = a1 % b1;
    if (r != 0 && ((r < 0) != (b1 < 0))) {
      r += b1;
      --q;
    }
    return Value::tuple({Value::integer(q), Value::integer(r)});
  });

  add(t, "pow", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("pow", a, {"base", "exp", "mod"}, 2);
    const Value &x = *p[0], &y = *p[1];
    if (p[2] && !p[2]->is_none()) {
      std::int64_t b = expect_int(x, "pow() base"), e = expect_int(y, "pow() exp"), m = expect_int(*p[2], "pow() mod");
      if (m == 0) raise_fault("ValueError", "pow() 3rd argument cannot be 0");
      if (e < 0) raise_fault("ValueError", "pow() negative exponent with modulus is not supported");
      __int128 result = 1 % m, base = ((b % m) + m) % m;
      while (e > 0) {
        if (e & 1) result = (result * base) % m;
        base = (base * base) % m;
        e >>= 1;
      }
      auto r = static_cast<std::int64_t>(result);
      if (r != 0 && ((r < 0) != (m < 0))) r += m;
      return Value::integer(r);
    }
    if (!x.is_numeric() || !y.is_numeric()) {
      raise_fault("TypeError", "unsupported operand type(s) for ** or pow(): '" + x.type_name() + "' and '" +
                                   y.type_name() + "'");
    }
    if (!x.is_float() && !y.is_float() && y.as_int() >= 0) {
      std::int64_t r = 1, b = x.as_int(), e = y.as_int();
      while (e > 0) {
        if (e & 1) r = checked_mul(r, b);
        e >>= 1;
        if (e > 0) b = checked_mul(b, b);
      }
      return Value::integer(r);
    }
    double xb = x.as_double(), ye = y.as_double();
    if (xb == 0.0 && ye < 0.0) raise_fault("ZeroDivisionError", "0.0 cannot be raised to a negative power");
    if (xb < 0.0 && ye != std::floor(ye)) raise_fault("ValueError", "negative number cannot be raised to a fractional power");
    return Value::number(std::pow(xb, ye));
  });

  add(t, "chr", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("chr", a, {"i"}, 1);
    return Value::string(encode_utf8(expect_int(*p[0], "chr() argument")));
  });

  add(t, "ord", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("ord", a, {"c"}, 1);
    const auto& s = expect_str(*p[0], "ord() argument");
    auto chars = utf8_chars(s);
    if (chars.size() != 1) {
      raise_fault("TypeError", "ord() expected a character, but string of length " +
                                   std::to_string(chars.size()) + " found");
    }
    return Value::integer(decode_utf8(chars[0]));
  });

  add(t, "hex", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("hex", a, {"number"}, 1);
    return Value::string(to_base_prefixed(expect_int(*p[0], "hex() argument"), 16, "0x"));
  });
  add(t, "oct", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("oct", a, {"number"}, 1);
    return Value::string(to_base_prefixed(expect_int(*p[0], "oct() argument"), 8, "0o"));
  });
  add(t, "bin", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("bin", a, {"number"}, 1);
    return Value::string(to_base_prefixed(expect_int(*p[0], "bin() argument"), 2, "0b"));
  });

  add(t, "callable", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("callable", a, {"obj"}, 1);
    return Value::boolean(p[0]->is_callable());
  });

  add(t, "hasattr", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("hasattr", a, {"obj", "name"}, 2);
    try {
      in.get_attribute(*p[0], expect_str(*p[1], "attribute name"));
      return Value::boolean(true);
    } catch (const ScriptFault& f) {
      if (f.type() == "AttributeError") return Value::boolean(false);
      throw;
    }
  });

  add(t, "getattr", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("getattr", a, {"obj", "name", "default"}, 2);
    try {
      return in.get_attribute(*p[0], expect_str(*p[1], "attribute name"));
    } catch (const ScriptFault& f) {
      if (f.type() == "AttributeError" && p[2]) return *p[2];
      throw;
    }
  });

  add(t, "open", [](Interpreter& in, CallArgs& a) { return builtin_open(in, a); });

  add(t, "final_answer", [](Interpreter&, CallArgs& a) -> Value {
    auto p = bind_arguments("final_answer", a, {"answer"}, 1);
    throw FinalAnswerSignal{*p[0]};
  });

  for (const auto& [name, parent] : exception_parents()) {
    (void)parent;
    if (name == "JSONDecodeError" || name == "StatisticsError" || name == "UnsupportedOperation") continue;
    t[name] = Value::callable(std::make_shared<ExceptionType>(name));
  }
  t["BaseException"] = Value::callable(std::make_shared<ExceptionType>("BaseException"));
  t["IOError"] = Value::callable(std::make_shared<ExceptionType>("OSError"));
  t["EnvironmentError"] = Value::callable(std::make_shared<ExceptionType>("OSError"));

  t["True"] = Value::boolean(true);
  t["False"] = Value::boolean(false);
  t["None"] = Value::none();
  return t;
}

}  // namespace

const std::map<std::string, Value, std::less<>>& builtin_table() {
  static const Table table = build_builtins();
  return table;
}

// ---- builtin methods ------------------------------------------------------

namespace {

const std::vector<std::string_view> kStrMethods{
    "upper", "lower", "strip", "lstrip", "rstrip", "split", "rsplit", "join", "replace",
    "startswith", "endswith", "find", "rfind", "index", "rindex", "count", "format", "isdigit",
    "isnumeric", "isdecimal", "isalpha", "isalnum", "isspace", "isupper", "islower", "title",
    "capitalize", "zfill", "splitlines", "partition", "rpartition", "center", "ljust", "rjust",
    "casefold", "removeprefix", "removesuffix", "swapcase", "encode"};
const std::vector<std::string_view> kListMethods{"append", "extend", "insert", "pop", "remove",
                                                 "index", "count", "sort", "reverse", "copy", "clear"};
const std::vector<std::string_view> kDictMethods{"get", "keys", "values", "items", "pop", "setdefault",
                                                 "update", "copy", "clear", "popitem"};
const std::vector<std::string_view> kTupleMethods{"index", "count"};
const std::vector<std::string_view> kFloatMethods{"is_integer", "hex"};
const std::vector<std::string_view> kIntMethods{"bit_length"};

bool listed(const std::vector<std::string_view>& v, std::string_view n) {
  return std::find(v.begin(), v.end(), n) != v.end();
}

constexpr const char* kWhitespace = " \t\n\r\f\v";

bool is_ws(char c) { return std::strchr(kWhitespace, c) != nullptr && c != '\0'; }

std::string ascii_map(std::string s, int (*f)(int)) {
  for (auto& c : s) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(f(static_cast<unsigned char>(c)));
  }
  return s;
}

/// Code-point offsets -> byte offsets for str methods taking start/end.
struct CodePoints {
  explicit CodePoints(const std::string& s) : ascii(is_ascii(s)) {
    if (!ascii) {
      std::size_t i = 0;
      while (i < s.size()) {
        starts.push_back(i);
        i += std::min(utf8_width(static_cast<unsigned char>(s[i])), s.size() - i);
      }
      starts.push_back(s.size());
    }
    length = ascii ? s.size() : starts.size() - 1;
  }
  std::size_t to_byte(std::size_t cp) const { return ascii ? cp : starts[cp]; }
  std::size_t to_cp(std::size_t byte) const {
    if (ascii) return byte;
    return static_cast<std::size_t>(std::lower_bound(starts.begin(), starts.end(), byte) - starts.begin());
  }
  bool ascii;
  std::vector<std::size_t> starts;
  std::size_t length;
};

/// Resolves optional start/end (code points) to a byte window.
std::pair<std::size_t, std::size_t> window(const CodePoints& cp, const std::optional<Value>& start,
                                           const std::optional<Value>& end) {
  auto s = resolve_slice(start ? *start : Value::none(), end ? *end : Value::none(), Value::none(), cp.length);
  auto b = static_cast<std::size_t>(std::clamp<std::int64_t>(s.start, 0, static_cast<std::int64_t>(cp.length)));
  auto e = static_cast<std::size_t>(std::clamp<std::int64_t>(s.stop, 0, static_cast<std::int64_t>(cp.length)));
  if (e < b) e = b;
  return {cp.to_byte(b), cp.to_byte(e)};
}

std::vector<Value> split_ws(const std::string& s, std::int64_t maxsplit, bool from_right) {
  std::vector<std::string> parts;
  if (!from_right) {
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && is_ws(s[i])) ++i;
      if (i >= s.size()) break;
      if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) == maxsplit) {
        std::size_t e = s.size();
        while (e > i && is_ws(s[e - 1])) --e;
        parts.push_back(s.substr(i, e - i));
        break;
      }
      std::size_t j = i;
      while (j < s.size() && !is_ws(s[j])) ++j;
      parts.push_back(s.substr(i, j - i));
      i = j;
    }
  } else {
    std::size_t i = s.size();
    while (i > 0) {
      while (i > 0 && is_ws(s[i - 1])) --i;
      if (i == 0) break;
      if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) == maxsplit) {
        std::size_t b = 0;
        while (b < i && is_ws(s[b])) ++b;
        parts.push_back(s.substr(b, i - b));
        break;
      }
      std::size_t j = i;
      while (j > 0 && !is_ws(s[j - 1])) --j;
      parts.push_back(s.substr(j, i - j));
      i = j;
    }
    std::reverse(parts.begin(), parts.end());
  }
  std::vector<Value> out;
  for (auto& p : parts) out.push_back(Value::string(std::move(p)));
  return out;
}

std::vector<Value> split_sep(const std::string& s, const std::string& sep, std::int64_t maxsplit,
                             bool from_right) {
  if (sep.empty()) raise_fault("ValueError", "empty separator");
  std::vector<std::string> parts;
  if (!from_right) {
    std::size_t i = 0;
    while (true) {
      if (maxsplit >= 0 && static_cast<std::int64_t>(parts.size()) == maxsplit) break;
      auto j = s.find(sep, i);
      if (j == std::string::npos) break;
      parts.push_back(s.substr(i, j - i));
      i = j + sep.size();
    }
    parts.push_back(s.substr(i));
  } else {
    std::size_t end = s.size();
    std::int64_t n = 0;
    std::vector<std::string> rev;
    while (maxsplit < 0 || n < maxsplit) {
      if (end < sep.size()) break;
      auto j = s.rfind(sep, end - sep.size());
      if (j == std::string::npos) break;
      rev.push_back(s.substr(j + sep.size(), end - j - sep.size()));
      end = j;
      ++n;
    }
    rev.push_back(s.substr(0, end));
    parts.assign(rev.rbegin(), rev.rend());
  }
  std::vector<Value> out;
  for (auto& p : parts) out.push_back(Value::string(std::move(p)));
  return out;
}

std::string strip_chars(const std::string& s, const std::optional<Value>& chars, bool left, bool right) {
  if (!chars || chars->is_none()) {
    std::size_t b = 0, e = s.size();
    if (left) while (b < e && is_ws(s[b])) ++b;
    if (right) while (e > b && is_ws(s[e - 1])) --e;
    return s.substr(b, e - b);
  }
  auto set = utf8_chars(expect_str(*chars, "strip arg"));
  auto cs = utf8_chars(s);
  auto in_set = [&](std::string_view c) { return std::find(set.begin(), set.end(), c) != set.end(); };
  std::size_t b = 0, e = cs.size();
  if (left) while (b < e && in_set(cs[b])) ++b;
  if (right) while (e > b && in_set(cs[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) out += cs[i];
  return out;
}

std::string pad_str(const std::string& s, std::int64_t width, const std::string& fill, int align) {
  auto len = static_cast<std::int64_t>(utf8_length(s));
  if (width <= len) return s;
  std::int64_t total = width - len;
  std::int64_t left = align < 0 ? 0 : align > 0 ? total : total / 2 + (total & width & 1);
  std::string out;
  for (std::int64_t i = 0; i < left; ++i) out += fill;
  out += s;
  for (std::int64_t i = 0; i < total - left; ++i) out += fill;
  return out;
}

bool affix_match(const std::string& s, const Value& affix, std::size_t b, std::size_t e, bool prefix,
                 const char* fname) {
  auto check = [&](const Value& v) {
    if (!v.is_str()) {
      raise_fault("TypeError", std::string(fname) + " first arg must be str or a tuple of str, not " + v.type_name());
    }
    const auto& a = v.as_str();
    if (a.size() > e - b) return false;
    return prefix ? s.compare(b, a.size(), a) == 0 : s.compare(e - a.size(), a.size(), a) == 0;
  };
  if (affix.is_tuple()) {
    return std::any_of(affix.as_tuple().items.begin(), affix.as_tuple().items.end(), check);
  }
  return check(affix);
}

bool all_chars(const std::string& s, int (*pred)(int)) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    return static_cast<unsigned char>(c) < 0x80 && pred(static_cast<unsigned char>(c));
  });
}

Value str_method(Interpreter& in, const std::string& s, std::string_view m, CallArgs& a) {
  std::string name = "str." + std::string(m);
  auto b = [&](std::initializer_list<std::string_view> names, std::size_t req) {
    return bind_arguments(m, a, names, req);
  };
  if (m == "upper") { b({}, 0); return Value::string(ascii_map(s, ::toupper)); }
  if (m == "lower" || m == "casefold") { b({}, 0); return Value::string(ascii_map(s, ::tolower)); }
  if (m == "swapcase") {
    b({}, 0);
    std::string out = s;
    for (auto& c : out) {
      if (std::isupper(static_cast<unsigned char>(c))) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      else if (std::islower(static_cast<unsigned char>(c))) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return Value::string(out);
  }
  if (m == "strip") { auto p = b({"chars"}, 0); return Value::string(strip_chars(s, p[0], true, true)); }
  if (m == "lstrip") { auto p = b({"chars"}, 0); return Value::string(strip_chars(s, p[0], true, false)); }
  if (m == "rstrip") { auto p = b({"chars"}, 0); return Value::string(strip_chars(s, p[0], false, true)); }
  if (m == "split" || m == "rsplit") {
    auto p = b({"sep", "maxsplit"}, 0);
    std::int64_t maxsplit = p[1] ? expect_int(*p[1], "maxsplit") : -1;
    bool right = m == "rsplit";
    if (!p[0] || p[0]->is_none()) return Value::list(split_ws(s, maxsplit, right));
    return Value::list(split_sep(s, expect_str(*p[0], "sep"), maxsplit, right));
  }
  if (m == "splitlines") {
    auto p = b({"keepends"}, 0);
    bool keep = p[0] && truthy(*p[0]);
    std::vector<Value> out;
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t j = i;
      while (j < s.size() && s[j] != '\n' && s[j] != '\r') ++j;
      std::size_t eol = j;
      if (j < s.size()) {
        if (s[j] == '\r' && j + 1 < s.size() && s[j + 1] == '\n') ++j;
        ++j;
      }
      out.push_back(Value::string(s.substr(i, (keep ? j : eol) - i)));
      i = j;
    }
    return Value::list(std::move(out));
  }
  if (m == "join") {
    auto p = b({"iterable"}, 1);
    std::string out;
    std::size_t idx = 0;
    in.iterate(*p[0], [&](const Value& v) {
      if (!v.is_str()) {
        raise_fault("TypeError", "sequence item " + std::to_string(idx) + ": expected str instance, " +
                                     v.type_name() + " found");
      }
      if (idx) out += s;
      out += v.as_str();
      in.check_string(out.size());
      ++idx;
      return true;
    });
    return Value::string(std::move(out));
  }
  if (m == "replace") {
    auto p = b({"old", "new", "count"}, 2);
    const auto& old = expect_str(*p[0], "replace() argument 1");
    const auto& nw = expect_str(*p[1], "replace() argument 2");
    std::int64_t count = p[2] ? expect_int(*p[2], "count") : -1;
    std::string out;
    if (old.empty()) {
      auto chars = utf8_chars(s);
      std::int64_t done = 0;
      for (std::size_t i = 0; i <= chars.size(); ++i) {
        if (count < 0 || done < count) {
          out += nw;
          ++done;
        }
        if (i < chars.size()) out += chars[i];
      }
      in.check_string(out.size());
      return Value::string(std::move(out));
    }
    std::size_t i = 0;
    std::int64_t done = 0;
    while (count < 0 || done < count) {
      auto j = s.find(old, i);
      if (j == std::string::npos) break;
      out.append(s, i, j - i);
      out += nw;
      in.check_string(out.size());
      i = j + old.size();
      ++done;
    }
    out.append(s, i, std::string::npos);
    return Value::string(std::move(out));
  }
  if (m == "startswith" || m == "endswith") {
    auto p = b({"affix", "start", "end"}, 1);
    CodePoints cp(s);
    auto [wb, we] = window(cp, p[1], p[2]);
    return Value::boolean(affix_match(s, *p[0], wb, we, m == "startswith", m == "startswith" ? "startswith" : "endswith"));
  }
  if (m == "find" || m == "rfind" || m == "index" || m == "rindex" || m == "count") {
    auto p = b({"sub", "start", "end"}, 1);
    const auto& sub = expect_str(*p[0], "must be str");
    CodePoints cp(s);
    auto [wb, we] = window(cp, p[1], p[2]);
    std::string_view hay(s.data() + wb, we - wb);
    if (m == "count") {
      if (sub.empty()) return Value::integer(static_cast<std::int64_t>(utf8_length(hay) + 1));
      std::int64_t n = 0;
      for (std::size_t i = hay.find(sub); i != std::string_view::npos; i = hay.find(sub, i + sub.size())) ++n;
      return Value::integer(n);
    }
    bool right = m == "rfind" || m == "rindex";
    auto pos = right ? hay.rfind(sub) : hay.find(sub);
    if (pos == std::string_view::npos) {
      if (m == "index" || m == "rindex") raise_fault("ValueError", "substring not found");
      return Value::integer(-1);
    }
    return Value::integer(static_cast<std::int64_t>(cp.to_cp(wb + pos)));
  }
  if (m == "format") return Value::string(format_string(s, a));
  if (m == "isdigit" || m == "isnumeric" || m == "isdecimal") { b({}, 0); return Value::boolean(all_chars(s, ::isdigit)); }
  if (m == "isalpha") { b({}, 0); return Value::boolean(all_chars(s, ::isalpha)); }
  if (m == "isalnum") { b({}, 0); return Value::boolean(all_chars(s, ::isalnum)); }
  if (m == "isspace") { b({}, 0); return Value::boolean(all_chars(s, ::isspace)); }
  if (m == "isupper" || m == "islower") {
    b({}, 0);
    bool cased = false, ok = true;
    for (char c : s) {
      auto u = static_cast<unsigned char>(c);
      if (std::isupper(u)) { cased = true; ok = ok && m == "isupper"; }
      if (std::islower(u)) { cased = true; ok = ok && m == "islower"; }
    }
    return Value::boolean(cased && ok);
  }
  if (m == "title") {
    b({}, 0);
    std::string out = s;
    bool prev_cased = false;
    for (auto& c : out) {
      auto u = static_cast<unsigned char>(c);
      if (std::isalpha(u)) {
        c = static_cast<char>(prev_cased ? std::tolower(u) : std::toupper(u));
        prev_cased = true;
      } else {
        prev_cased = false;
      }
    }
    return Value::string(out);
  }
  if (m == "capitalize") {
    b({}, 0);
    std::string out = ascii_map(s, ::tolower);
    if (!out.empty() && static_cast<unsigned char>(out[0]) < 0x80) {
      out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return Value::string(out);
  }
  if (m == "zfill") {
    auto p = b({"width"}, 1);
    std::int64_t w = expect_int(*p[0], "width");
    auto len = static_cast<std::int64_t>(utf8_length(s));
    if (w <= len) return Value::string(s);
    std::string zeros(static_cast<std::size_t>(w - len), '0');
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) return Value::string(s.substr(0, 1) + zeros + s.substr(1));
    return Value::string(zeros + s);
  }
  if (m == "center" || m == "ljust" || m == "rjust") {
    auto p = b({"width", "fillchar"}, 1);
    std::int64_t w = expect_int(*p[0], "width");
    in.check_string(static_cast<std::size_t>(std::max<std::int64_t>(w, 0)));
    std::string fill = " ";
    if (p[1]) {
      fill = expect_str(*p[1], "fillchar");
      if (utf8_length(fill) != 1) raise_fault("TypeError", "The fill character must be exactly one character long");
    }
    return Value::string(pad_str(s, w, fill, m == "ljust" ? -1 : m == "rjust" ? 1 : 0));
  }
  if (m == "partition" || m == "rpartition") {
    auto p = b({"sep"}, 1);
    const auto& sep = expect_str(*p[0], "sep");
    if (sep.empty()) raise_fault("ValueError", "empty separator");
    auto pos = m == "partition" ? s.find(sep) : s.rfind(sep);
    if (pos == std::string::npos) {
      if (m == "partition") return Value::tuple({Value::string(s), Value::string(""), Value::string("")});
      return Value::tuple({Value::string(""), Value::string(""), Value::string(s)});
    }
    return Value::tuple({Value::string(s.substr(0, pos)), Value::string(sep),
                         Value::string(s.substr(pos + sep.size()))});
  }
  if (m == "removeprefix") {
    auto p = b({"prefix"}, 1);
    const auto& x = expect_str(*p[0], "prefix");
    return Value::string(s.compare(0, x.size(), x) == 0 && s.size() >= x.size() ? s.substr(x.size()) : s);
  }
  if (m == "removesuffix") {
    auto p = b({"suffix"}, 1);
    const auto& x = expect_str(*p[0], "suffix");
    if (!x.empty() && s.size() >= x.size() && s.compare(s.size() - x.size(), x.size(), x) == 0) {
      return Value::string(s.substr(0, s.size() - x.size()));
    }
    return Value::string(s);
  }
  if (m == "encode") raise_fault("TypeError", "bytes are not supported in this environment");
  raise_fault("AttributeError", "'str' object has no attribute '" + std::string(m) + "'");
}

std::int64_t find_index(const std::vector<Value>& items, const Value& x, const std::optional<Value>& start,
                        const std::optional<Value>& stop, const std::string& tname) {
  auto s = resolve_slice(start ? *start : Value::none(), stop ? *stop : Value::none(), Value::none(), items.size());
  for (std::int64_t i = std::max<std::int64_t>(s.start, 0); i < s.stop; ++i) {
    if (equals(items[static_cast<std::size_t>(i)], x)) return i;
  }
  if (tname == "tuple") raise_fault("ValueError", "tuple.index(x): x not in tuple");
  raise_fault("ValueError", repr(x) + " is not in list");
}

Value list_method(Interpreter& in, const Value& self, std::string_view m, CallArgs& a) {
  auto& items = self.as_list().items;
  auto b = [&](std::initializer_list<std::string_view> names, std::size_t req) {
    return bind_arguments(m, a, names, req);
  };
  if (m == "append") {
    auto p = b({"object"}, 1);
    in.check_length(items.size() + 1);
    items.push_back(*p[0]);
    return Value::none();
  }
  if (m == "extend") {
    auto p = b({"iterable"}, 1);
    auto more = in.to_vector(*p[0]);
    in.check_length(items.size() + more.size());
    items.insert(items.end(), more.begin(), more.end());
    return Value::none();
  }
  if (m == "insert") {
    auto p = b({"index", "object"}, 2);
    std::int64_t i = expect_int(*p[0], "index");
    auto n = static_cast<std::int64_t>(items.size());
    if (i < 0) i = std::max<std::int64_t>(i + n, 0);
    if (i > n) i = n;
    in.check_length(items.size() + 1);
    items.insert(items.begin() + i, *p[1]);
    return Value::none();
  }
  if (m == "pop") {
    auto p = b({"index"}, 0);
    if (items.empty()) raise_fault("IndexError", "pop from empty list");
    std::int64_t i = p[0] ? expect_int(*p[0], "index") : -1;
    if (!normalize_index(i, items.size())) raise_fault("IndexError", "pop index out of range");
    Value v = items[static_cast<std::size_t>(i)];
    items.erase(items.begin() + i);
    return v;
  }
  if (m == "remove") {
    auto p = b({"value"}, 1);
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (equals(items[i], *p[0])) {
        items.erase(items.begin() + static_cast<std::ptrdiff_t>(i));
        return Value::none();
      }
    }
    raise_fault("ValueError", "list.remove(x): x not in list");
  }
  if (m == "index") {
    auto p = b({"value", "start", "stop"}, 1);
    return Value::integer(find_index(items, *p[0], p[1], p[2], "list"));
  }
  if (m == "count") {
    auto p = b({"value"}, 1);
    return Value::integer(static_cast<std::int64_t>(
        std::count_if(items.begin(), items.end(), [&](const Value& v) { return equals(v, *p[0]); })));
  }
  if (m == "sort") {
    if (!a.positional.empty()) raise_fault("TypeError", "sort() takes no positional arguments");
    auto p = b({"key", "reverse"}, 0);
    bool reverse = p[1] && truthy(*p[1]);
    // Sort a snapshot so that mutation from a key function cannot corrupt the list.
    std::vector<Value> snapshot = items;
    items = sort_values(in, std::move(snapshot), p[0] ? *p[0] : Value::none(), reverse);
    return Value::none();
  }
  if (m == "reverse") { b({}, 0); std::reverse(items.begin(), items.end()); return Value::none(); }
  if (m == "copy") { b({}, 0); return Value::list(items); }
  if (m == "clear") { b({}, 0); items.clear(); return Value::none(); }
  raise_fault("AttributeError", "'list' object has no attribute '" + std::string(m) + "'");
}

std::optional<DictKey> lookup_key(const Value& k) {
  if (k.is_list() || k.is_dict()) raise_fault("TypeError", "unhashable type: '" + k.type_name() + "'");
  return to_dict_key(k);
}

Value dict_method(Interpreter& in, const Value& self, std::string_view m, CallArgs& a) {
  auto& d = self.as_dict();
  auto b = [&](std::initializer_list<std::string_view> names, std::size_t req) {
    return bind_arguments(m, a, names, req);
  };
  if (m == "get") {
    auto p = b({"key", "default"}, 1);
    auto k = lookup_key(*p[0]);
    if (k) {
      if (const Value* v = d.find(*k)) return *v;
    }
    return p[1] ? *p[1] : Value::none();
  }
  if (m == "keys" || m == "values" || m == "items") {
    b({}, 0);
    std::vector<Value> out;
    out.reserve(d.size());
    for (const auto& [k, v] : d.entries()) {
      if (m == "keys") out.push_back(k);
      else if (m == "values") out.push_back(v);
      else out.push_back(Value::tuple({k, v}));
    }
    return Value::list(std::move(out));
  }
  if (m == "pop") {
    auto p = b({"key", "default"}, 1);
    auto k = lookup_key(*p[0]);
    if (k) {
      if (const Value* v = d.find(*k)) {
        Value out = *v;
        d.erase(*k);
        return out;
      }
    }
    if (p[1]) return *p[1];
    raise_fault("KeyError", repr(*p[0]));
  }
  if (m == "setdefault") {
    auto p = b({"key", "default"}, 1);
    auto k = lookup_key(*p[0]);
    if (!k) raise_fault("TypeError", "unsupported dictionary key type: '" + p[0]->type_name() + "'");
    if (const Value* v = d.find(*k)) return *v;
    Value dv = p[1] ? *p[1] : Value::none();
    d.set(*k, dv);
    return dv;
  }
  if (m == "update") {
    CallArgs copy = a;
    Value src = dict_from(in, copy);
    for (const auto& [k, v] : src.as_dict().entries()) d.set(*to_dict_key(k), v);
    return Value::none();
  }
  if (m == "copy") { b({}, 0); return Value::dict(std::make_shared<DictObject>(d)); }
  if (m == "clear") { b({}, 0); d.clear(); return Value::none(); }
  if (m == "popitem") {
    b({}, 0);
    if (d.size() == 0) raise_fault("KeyError", "'popitem(): dictionary is empty'");
    auto [k, v] = d.entries().back();
    d.erase(*to_dict_key(k));
    return Value::tuple({k, v});
  }
  raise_fault("AttributeError", "'dict' object has no attribute '" + std::string(m) + "'");
}

}  // namespace

bool has_builtin_method(const Value& self, std::string_view name) {
  switch (self.kind()) {
    case Value::Kind::Str: return listed(kStrMethods, name);
    case Value::Kind::List: return listed(kListMethods, name);
    case Value::Kind::Dict: return listed(kDictMethods, name);
    case Value::Kind::Tuple: return listed(kTupleMethods, name);
    case Value::Kind::Float: return listed(kFloatMethods, name);
    case Value::Kind::Int: return listed(kIntMethods, name);
    default: return false;
  }
}

Value call_builtin_method(Interpreter& interp, const Value& self, std::string_view name, CallArgs& args) {
  switch (self.kind()) {
    case Value::Kind::Str: return str_method(interp, self.as_str(), name, args);
    case Value::Kind::List: return list_method(interp, self, name, args);
    case Value::Kind::Dict: return dict_method(interp, self, name, args);
    case Value::Kind::Tuple: {
      const auto& items = self.as_tuple().items;
      if (name == "index") {
        auto p = bind_arguments(name, args, {"value", "start", "stop"}, 1);
        return Value::integer(find_index(items, *p[0], p[1], p[2], "tuple"));
      }
      auto p = bind_arguments(name, args, {"value"}, 1);
      return Value::integer(static_cast<std::int64_t>(
          std::count_if(items.begin(), items.end(), [&](const Value& v) { return equals(v, *p[0]); })));
    }
    case Value::Kind::Float: {
      bind_arguments(name, args, {}, 0);
      double d = self.as_double();
      if (name == "is_integer") return Value::boolean(std::isfinite(d) && d == std::floor(d));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%a", d);
      return Value::string(buf);
    }
    case Value::Kind::Int: {
      bind_arguments(name, args, {}, 0);
      std::int64_t v = self.as_int();
      std::uint64_t u = v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
      return Value::integer(u == 0 ? 0 : 64 - __builtin_clzll(u));
    }
    default: break;
  }
  raise_fault("AttributeError", "'" + self.type_name() + "' object has no attribute '" + std::string(name) + "'");
}

Value BoundMethod::call(Interpreter& interp, CallArgs args) {
  return call_builtin_method(interp, self_, method_, args);
}

}  // namespace pathagent::script
