// Host-implemented shims for the importable modules: math, json, random,
// statistics and pathlib.

#include "pathagent/script/modules.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "internal.hpp"
#include "pathagent/script/value_json.hpp"

namespace fs = std::filesystem;

namespace pathagent::script {

// ---- RandomState ----------------------------------------------------------

namespace {
constexpr int kN = 624;
constexpr int kM = 397;
}  // namespace

void RandomState::init_genrand(std::uint32_t s) {
  mt_[0] = s;
  for (int i = 1; i < kN; ++i) {
    mt_[i] = 1812433253u * (mt_[i - 1] ^ (mt_[i - 1] >> 30)) + static_cast<std::uint32_t>(i);
  }
  mti_ = kN;
}

void RandomState::seed(std::uint64_t s) {
  // CPython splits abs(seed) into 32-bit words, least significant first.
  std::vector<std::uint32_t> key;
  do {
    key.push_back(static_cast<std::uint32_t>(s & 0xFFFFFFFFu));
    s >>= 32;
  } while (s != 0);
  init_genrand(19650218u);
  int i = 1;
  std::size_t j = 0;
  for (int k = std::max<int>(kN, static_cast<int>(key.size())); k > 0; --k) {
    mt_[i] = (mt_[i] ^ ((mt_[i - 1] ^ (mt_[i - 1] >> 30)) * 1664525u)) + key[j] +
             static_cast<std::uint32_t>(j);
    ++i;
    ++j;
    if (i >= kN) {
      mt_[0] = mt_[kN - 1];
      i = 1;
    }
    if (j >= key.size()) j = 0;
  }
  for (int k = kN - 1; k > 0; --k) {
    mt_[i] = (mt_[i] ^ ((mt_[i - 1] ^ (mt_[i - 1] >> 30)) * 1566083941u)) -
             static_cast<std::uint32_t>(i);
    ++i;
    if (i >= kN) {
      mt_[0] = mt_[kN - 1];
      i = 1;
    }
  }
  mt_[0] = 0x80000000u;
  mti_ = kN;
  gauss_next_.reset();
}

std::uint32_t RandomState::next_u32() {
  static constexpr std::uint32_t mag01[2] = {0x0u, 0x9908b0dfu};
  if (mti_ >= kN) {
    int kk = 0;
    for (; kk < kN - kM; ++kk) {
      std::uint32_t y = (mt_[kk] & 0x80000000u) | (mt_[kk + 1] & 0x7fffffffu);
      mt_[kk] = mt_[kk + kM] ^ (y >> 1) ^ mag01[y & 1u];
    }
    for (; kk < kN - 1; ++kk) {
      std::uint32_t y = (mt_[kk] & 0x80000000u) | (mt_[kk + 1] & 0x7fffffffu);
      mt_[kk] = mt_[kk + (kM - kN)] ^ (y >> 1) ^ mag01[y & 1u];
    }
    std::uint32_t y = (mt_[kN - 1] & 0x80000000u) | (mt_[0] & 0x7fffffffu);
    mt_[kN - 1] = mt_[kM - 1] ^ (y >> 1) ^ mag01[y & 1u];
    mti_ = 0;
  }
  std::uint32_t y = mt_[mti_++];
  y ^= (y >> 11);
  y ^= (y << 7) & 0x9d2c5680u;
  y ^= (y << 15) & 0xefc60000u;
  y ^= (y >> 18);
  return y;
}

double RandomState::random() {
  std::uint32_t a = next_u32() >> 5, b = next_u32() >> 6;
  return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

std::uint64_t RandomState::getrandbits(int k) {
  if (k <= 0) return 0;
  if (k <= 32) return next_u32() >> (32 - k);
  std::uint64_t lo = next_u32();
  std::uint64_t hi = next_u32() >> (64 - k);
  return lo | (hi << 32);
}

std::uint64_t RandomState::randbelow(std::uint64_t n) {
  if (n == 0) return 0;
  int k = 64 - __builtin_clzll(n);
  std::uint64_t r = getrandbits(k);
  while (r >= n) r = getrandbits(k);
  return r;
}

double RandomState::gauss(double mu, double sigma) {
  double z;
  if (gauss_next_) {
    z = *gauss_next_;
    gauss_next_.reset();
  } else {
    double x2pi = random() * 2.0 * M_PI;
    double g2rad = std::sqrt(-2.0 * std::log(1.0 - random()));
    z = std::cos(x2pi) * g2rad;
    gauss_next_ = std::sin(x2pi) * g2rad;
  }
  return mu + z * sigma;
}

// ---- pathlib --------------------------------------------------------------

namespace {

std::string normalize_path(const std::string& raw) {
  if (raw.empty()) return ".";
  bool absolute = raw[0] == '/';
  std::vector<std::string> parts;
  std::stringstream ss(raw);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (part.empty() || part == ".") continue;
    parts.push_back(part);
  }
  std::string out = absolute ? "/" : "";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "/";
    out += parts[i];
  }
  if (out.empty()) return ".";
  return out;
}

std::string join_path(const std::string& a, const std::string& b) {
  if (!b.empty() && b[0] == '/') return normalize_path(b);
  if (a == ".") return normalize_path(b);
  return normalize_path(a + "/" + b);
}

bool fnmatch(std::string_view pat, std::string_view s) {
  std::size_t p = 0, i = 0, star = std::string_view::npos, mark = 0;
  while (i < s.size()) {
    if (p < pat.size() && pat[p] == '[') {
      auto close = pat.find(']', p + 1);
      if (close != std::string_view::npos) {
        bool neg = p + 1 < close && (pat[p + 1] == '!' || pat[p + 1] == '^');
        bool hit = false;
        for (std::size_t q = p + 1 + (neg ? 1 : 0); q < close; ++q) {
          if (q + 2 < close && pat[q + 1] == '-') {
            if (s[i] >= pat[q] && s[i] <= pat[q + 2]) hit = true;
            q += 2;
          } else if (pat[q] == s[i]) {
            hit = true;
          }
        }
        if (hit != neg) {
          p = close + 1;
          ++i;
          continue;
        }
      }
    } else if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
      ++p;
      ++i;
      continue;
    }
    if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = i;
      continue;
    }
    if (star != std::string_view::npos) {
      p = star + 1;
      i = ++mark;
      continue;
    }
    return false;
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

class PathObject : public HostObject {
 public:
  explicit PathObject(std::string p) : p_(normalize_path(p)) {}
  std::string type_name() const override { return "PosixPath"; }
  std::string repr() const override { return "PosixPath(" + script::repr(Value::string(p_)) + ")"; }
  std::string str() const override { return p_; }
  bool equals(const HostObject& other) const override {
    auto* o = dynamic_cast<const PathObject*>(&other);
    return o && o->p_ == p_;
  }
  std::optional<Value> get_attr(Interpreter& interp, std::string_view attr) override;
  const std::string& path() const { return p_; }

 private:
  std::string name() const {
    if (p_ == "." || p_ == "/") return "";
    auto pos = p_.rfind('/');
    return pos == std::string::npos ? p_ : p_.substr(pos + 1);
  }
  std::string parent() const {
    if (p_ == "/" || p_ == ".") return p_;
    auto pos = p_.rfind('/');
    if (pos == std::string::npos) return ".";
    if (pos == 0) return "/";
    return p_.substr(0, pos);
  }
  std::string suffix() const {
    auto n = name();
    auto i = n.rfind('.');
    return (i != std::string::npos && i > 0 && i < n.size() - 1) ? n.substr(i) : "";
  }
  std::string stem() const {
    auto n = name();
    auto sfx = suffix();
    return n.substr(0, n.size() - sfx.size());
  }
  std::string p_;
};

std::string path_arg(const Value& v, const char* what) {
  if (auto p = path_string(v)) return *p;
  if (v.is_str()) return v.as_str();
  raise_fault("TypeError", std::string(what) + ": expected str or Path, not " + v.type_name());
}

Value path_ctor(Interpreter&, CallArgs& a) {
  if (!a.keywords.empty()) raise_fault("TypeError", "Path() takes no keyword arguments");
  std::string p = ".";
  for (const auto& seg : a.positional) p = join_path(p, path_arg(seg, "Path()"));
  return make_path(p);
}

void glob_walk(Interpreter& interp, const fs::path& base, const std::string& rel,
               const std::vector<std::string>& pats, std::size_t k, std::vector<std::string>& out) {
  std::error_code ec;
  fs::path here = rel.empty() ? base : base / rel;
  if (k == pats.size()) {
    out.push_back(rel);
    return;
  }
  auto child = [&](const std::string& name) { return rel.empty() ? name : rel + "/" + name; };
  if (pats[k] == "**") {
    glob_walk(interp, base, rel, pats, k + 1, out);
    std::vector<std::string> dirs;
    for (auto it = fs::directory_iterator(here, ec); !ec && it != fs::directory_iterator(); it.increment(ec)) {
      if (it->is_directory(ec) && !it->is_symlink(ec)) dirs.push_back(it->path().filename().string());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      interp.tick();
      // "**" continues at the same pattern index one level down.
      std::vector<std::string> sub;
      glob_walk(interp, base, child(d), pats, k, sub);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return;
  }
  std::vector<std::string> names;
  for (auto it = fs::directory_iterator(here, ec); !ec && it != fs::directory_iterator(); it.increment(ec)) {
    std::string n = it->path().filename().string();
    if (!fnmatch(pats[k], n)) continue;
    if (k + 1 < pats.size() && !it->is_directory(ec)) continue;
    names.push_back(n);
  }
  std::sort(names.begin(), names.end());
  for (const auto& n : names) glob_walk(interp, base, child(n), pats, k + 1, out);
}

std::optional<Value> PathObject::get_attr(Interpreter&, std::string_view attr) {
  std::string p = p_;
  auto method = [&](const char* name, HostFn fn) { return make_function(name, std::move(fn)); };
  if (attr == "name") return Value::string(name());
  if (attr == "stem") return Value::string(stem());
  if (attr == "suffix") return Value::string(suffix());
  if (attr == "suffixes") {
    std::vector<Value> out;
    auto n = name();
    if (n.size() > 1 && n.back() != '.') {
      auto i = n.find('.', 1);
      while (i != std::string::npos) {
        auto j = n.find('.', i + 1);
        out.push_back(Value::string(n.substr(i, j == std::string::npos ? std::string::npos : j - i)));
        i = j;
      }
    }
    return Value::list(std::move(out));
  }
  if (attr == "parent") return make_path(parent());
  if (attr == "parts") {
    std::vector<Value> out;
    if (p == ".") return Value::tuple();
    if (p[0] == '/') out.push_back(Value::string("/"));
    std::stringstream ss(p);
    std::string part;
    while (std::getline(ss, part, '/')) {
      if (!part.empty()) out.push_back(Value::string(part));
    }
    return Value::tuple(std::move(out));
  }
  if (attr == "as_posix") {
    return method("as_posix", [p](Interpreter&, CallArgs&) { return Value::string(p); });
  }
  if (attr == "is_absolute") {
    return method("is_absolute", [p](Interpreter&, CallArgs&) { return Value::boolean(p[0] == '/'); });
  }
  if (attr == "joinpath") {
    return method("joinpath", [p](Interpreter&, CallArgs& a) {
      std::string out = p;
      for (const auto& seg : a.positional) out = join_path(out, path_arg(seg, "joinpath()"));
      return make_path(out);
    });
  }
  if (attr == "with_suffix") {
    std::string stem_part = stem(), par = parent();
    return method("with_suffix", [p, stem_part, par](Interpreter&, CallArgs& a) {
      auto args = bind_arguments("with_suffix", a, {"suffix"}, 1);
      const auto& s = expect_str(*args[0], "suffix");
      if (!s.empty() && (s[0] != '.' || s.size() == 1)) raise_fault("ValueError", "Invalid suffix '" + s + "'");
      if (stem_part.empty()) raise_fault("ValueError", "PosixPath('" + p + "') has an empty name");
      return make_path(join_path(par, stem_part + s));
    });
  }
  if (attr == "with_name") {
    std::string par = parent();
    return method("with_name", [par](Interpreter&, CallArgs& a) {
      auto args = bind_arguments("with_name", a, {"name"}, 1);
      const auto& n = expect_str(*args[0], "name");
      if (n.empty() || n.find('/') != std::string::npos) raise_fault("ValueError", "Invalid name '" + n + "'");
      return make_path(join_path(par, n));
    });
  }
  if (attr == "relative_to") {
    return method("relative_to", [p](Interpreter&, CallArgs& a) {
      auto args = bind_arguments("relative_to", a, {"other"}, 1);
      std::string other = normalize_path(path_arg(*args[0], "relative_to()"));
      if (other == ".") return make_path(p);
      if (p == other) return make_path(".");
      if (p.size() > other.size() && p.compare(0, other.size(), other) == 0 &&
          (p[other.size()] == '/' || other == "/")) {
        return make_path(p.substr(other == "/" ? 1 : other.size() + 1));
      }
      raise_fault("ValueError", "'" + p + "' is not in the subpath of '" + other + "'");
    });
  }
  if (attr == "exists" || attr == "is_file" || attr == "is_dir") {
    std::string which(attr);
    return method(which.c_str(), [p, which](Interpreter& in, CallArgs&) {
      fs::path r = in.sandbox().resolve(p, Access::Read);
      std::error_code ec;
      if (which == "exists") return Value::boolean(fs::exists(r, ec));
      if (which == "is_file") return Value::boolean(fs::is_regular_file(r, ec));
      return Value::boolean(fs::is_directory(r, ec));
    });
  }
  if (attr == "iterdir") {
    return method("iterdir", [p](Interpreter& in, CallArgs&) {
      fs::path r = in.sandbox().resolve(p, Access::Read);
      std::error_code ec;
      if (!fs::is_directory(r, ec)) {
        raise_fault(fs::exists(r, ec) ? "NotADirectoryError" : "FileNotFoundError",
                    std::string(fs::exists(r, ec) ? "[Errno 20] Not a directory: " : "[Errno 2] No such file or directory: ") +
                        script::repr(Value::string(p)));
      }
      std::vector<std::string> names;
      for (const auto& e : fs::directory_iterator(r)) names.push_back(e.path().filename().string());
      std::sort(names.begin(), names.end());
      std::vector<Value> out;
      for (const auto& n : names) out.push_back(make_path(join_path(p, n)));
      return Value::object(std::make_shared<IteratorObject>(std::move(out)));
    });
  }
  if (attr == "glob" || attr == "rglob") {
    bool recursive = attr == "rglob";
    return method(recursive ? "rglob" : "glob", [p, recursive](Interpreter& in, CallArgs& a) {
      auto args = bind_arguments(recursive ? "rglob" : "glob", a, {"pattern"}, 1);
      std::string pattern = expect_str(*args[0], "pattern");
      if (pattern.empty()) raise_fault("ValueError", "Unacceptable pattern: ''");
      if (pattern[0] == '/') raise_fault("NotImplementedError", "Non-relative patterns are unsupported");
      if (recursive) pattern = "**/" + pattern;
      std::vector<std::string> pats;
      std::stringstream ss(pattern);
      std::string part;
      while (std::getline(ss, part, '/')) {
        if (!part.empty() && part != ".") pats.push_back(part);
      }
      fs::path base = in.sandbox().resolve(p, Access::Read);
      std::vector<std::string> rels;
      std::error_code ec;
      if (fs::is_directory(base, ec)) glob_walk(in, base, "", pats, 0, rels);
      std::sort(rels.begin(), rels.end());
      rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
      std::vector<Value> out;
      for (const auto& r : rels) {
        if (r.empty()) continue;
        out.push_back(make_path(join_path(p, r)));
      }
      return Value::object(std::make_shared<IteratorObject>(std::move(out)));
    });
  }
  if (attr == "read_text") {
    return method("read_text", [p](Interpreter& in, CallArgs& a) {
      bind_arguments("read_text", a, {"encoding", "errors"}, 0);
      fs::path r = in.sandbox().resolve(p, Access::Read);
      FileHandle fh(r, p, 'r');
      return Value::string(fh.read_all());
    });
  }
  if (attr == "write_text") {
    return method("write_text", [p](Interpreter& in, CallArgs& a) {
      auto args = bind_arguments("write_text", a, {"data", "encoding", "errors", "newline"}, 1);
      if (!args[0]->is_str()) raise_fault("TypeError", "data must be str, not " + args[0]->type_name());
      fs::path r = in.sandbox().resolve(p, Access::Write);
      FileHandle fh(r, p, 'w');
      in.sandbox().record_write(r);
      fh.write(args[0]->as_str());
      fh.close();
      return Value::integer(static_cast<std::int64_t>(utf8_length(args[0]->as_str())));
    });
  }
  if (attr == "mkdir") {
    return method("mkdir", [p](Interpreter& in, CallArgs& a) {
      auto args = bind_arguments("mkdir", a, {"mode", "parents", "exist_ok"}, 0);
      bool parents = args[1] && truthy(*args[1]);
      bool exist_ok = args[2] && truthy(*args[2]);
      fs::path r = in.sandbox().resolve(p, Access::Write);
      std::error_code ec;
      std::string shown = script::repr(Value::string(p));
      if (fs::exists(r, ec)) {
        if (exist_ok && fs::is_directory(r, ec)) return Value::none();
        raise_fault("FileExistsError", "[Errno 17] File exists: " + shown);
      }
      if (!parents && !fs::is_directory(r.parent_path(), ec)) {
        raise_fault("FileNotFoundError", "[Errno 2] No such file or directory: " + shown);
      }
      fs::create_directories(r);
      return Value::none();
    });
  }
  if (attr == "open") {
    return method("open", [p](Interpreter& in, CallArgs& a) {
      CallArgs b = a;
      b.positional.insert(b.positional.begin(), Value::string(p));
      return builtin_open(in, b);
    });
  }
  if (attr == "resolve" || attr == "absolute") {
    return method(attr == "resolve" ? "resolve" : "absolute", [p](Interpreter& in, CallArgs&) {
      return make_path(in.sandbox().resolve(p, Access::Read).generic_string());
    });
  }
  return std::nullopt;
}

// ---- math -----------------------------------------------------------------

double num(const Value& v) { return expect_number(v, "argument"); }

[[noreturn]] void domain_error() { raise_fault("ValueError", "math domain error"); }

double check_range(double r, double x) {
  if (std::isinf(r) && std::isfinite(x)) raise_fault("OverflowError", "math range error");
  return r;
}

Value float_to_int_value(double d) {
  if (std::isnan(d)) raise_fault("ValueError", "cannot convert float NaN to integer");
  if (std::isinf(d)) raise_fault("OverflowError", "cannot convert float infinity to integer");
  if (d >= 9223372036854775808.0 || d < -9223372036854775808.0) {
    raise_fault("OverflowError", "integer overflow (integers are limited to 64 bits)");
  }
  return Value::integer(static_cast<std::int64_t>(d));
}

/// Shewchuk's exactly rounded float summation, as in CPython's math.fsum.
double exact_sum(const std::vector<double>& xs) {
  std::vector<double> partials;
  double special = 0.0, inf_sum = 0.0;
  for (double x : xs) {
    if (!std::isfinite(x)) {
      if (std::isinf(x)) inf_sum += x;
      special += x;
      continue;
    }
    std::size_t i = 0;
    for (double y : partials) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      double hi = x + y;
      double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    if (!std::isfinite(x)) raise_fault("OverflowError", "intermediate overflow in fsum");
    partials.resize(i);
    partials.push_back(x);
  }
  if (special != 0.0) {
    if (std::isnan(inf_sum)) raise_fault("ValueError", "-inf + inf in fsum");
    return special;
  }
  double hi = 0.0;
  std::size_t n = partials.size();
  if (n > 0) {
    hi = partials[--n];
    double lo = 0.0;
    while (n > 0) {
      double x = hi;
      double y = partials[--n];
      hi = x + y;
      double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
      double y = lo * 2.0;
      double x = hi + y;
      double yr = x - hi;
      if (y == yr) hi = x;
    }
  }
  return hi;
}

std::vector<double> numbers_of(Interpreter& in, const Value& iterable) {
  std::vector<double> out;
  in.iterate(iterable, [&](const Value& v) {
    out.push_back(num(v));
    return true;
  });
  return out;
}

void add_fn(ModuleObject& m, const std::string& name, HostFn fn) { m.set(name, make_function(name, std::move(fn))); }

void add_unary(ModuleObject& m, const std::string& name, double (*f)(double), bool domain_check) {
  add_fn(m, name, [name, f, domain_check](Interpreter&, CallArgs& a) {
    auto p = bind_arguments(name, a, {"x"}, 1);
    double x = num(*p[0]);
    double r = f(x);
    if (domain_check && std::isnan(r) && !std::isnan(x)) domain_error();
    return Value::number(check_range(r, x));
  });
}

std::shared_ptr<ModuleObject> build_math() {
  auto m = std::make_shared<ModuleObject>("math");
  m->set("pi", Value::number(M_PI));
  m->set("e", Value::number(M_E));
  m->set("tau", Value::number(2 * M_PI));
  m->set("inf", Value::number(HUGE_VAL));
  m->set("nan", Value::number(std::nan("")));
  add_unary(*m, "sqrt", [](double x) { return x < 0 ? std::nan("") : std::sqrt(x); }, true);
  add_unary(*m, "exp", [](double x) { return std::exp(x); }, false);
  add_unary(*m, "log2", [](double x) { return x <= 0 ? std::nan("") : std::log2(x); }, true);
  add_unary(*m, "log10", [](double x) { return x <= 0 ? std::nan("") : std::log10(x); }, true);
  add_unary(*m, "log1p", [](double x) { return x <= -1 ? std::nan("") : std::log1p(x); }, true);
  add_unary(*m, "expm1", [](double x) { return std::expm1(x); }, false);
  add_unary(*m, "fabs", [](double x) { return std::fabs(x); }, false);
  add_unary(*m, "sin", [](double x) { return std::isinf(x) ? std::nan("") : std::sin(x); }, true);
  add_unary(*m, "cos", [](double x) { return std::isinf(x) ? std::nan("") : std::cos(x); }, true);
  add_unary(*m, "tan", [](double x) { return std::isinf(x) ? std::nan("") : std::tan(x); }, true);
  add_unary(*m, "asin", [](double x) { return std::asin(x); }, true);
  add_unary(*m, "acos", [](double x) { return std::acos(x); }, true);
  add_unary(*m, "atan", [](double x) { return std::atan(x); }, false);
  add_unary(*m, "sinh", [](double x) { return std::sinh(x); }, false);
  add_unary(*m, "cosh", [](double x) { return std::cosh(x); }, false);
  add_unary(*m, "tanh", [](double x) { return std::tanh(x); }, false);
  add_unary(*m, "degrees", [](double x) { return x * (180.0 / M_PI); }, false);
  add_unary(*m, "radians", [](double x) { return x * (M_PI / 180.0); }, false);
  add_unary(*m, "erf", [](double x) { return std::erf(x); }, false);
  add_unary(*m, "erfc", [](double x) { return std::erfc(x); }, false);
  add_unary(*m, "gamma", [](double x) { return (x <= 0 && x == std::floor(x)) ? std::nan("") : std::tgamma(x); }, true);
  add_unary(*m, "lgamma", [](double x) { return (x <= 0 && x == std::floor(x)) ? std::nan("") : std::lgamma(x); }, true);

  add_fn(*m, "log", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("log", a, {"x", "base"}, 1);
    double x = num(*p[0]);
    if (x <= 0) domain_error();
    double r = std::log(x);
    if (p[1]) {
      double b = num(*p[1]);
      if (b <= 0) domain_error();
      double lb = std::log(b);
      if (lb == 0.0) raise_fault("ZeroDivisionError", "float division by zero");
      r /= lb;
    }
    return Value::number(r);
  });
  add_fn(*m, "pow", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("pow", a, {"x", "y"}, 2);
    double x = num(*p[0]), y = num(*p[1]);
    if (x == 0.0 && y < 0.0) domain_error();
    if (x < 0.0 && std::isfinite(x) && std::isfinite(y) && y != std::floor(y)) domain_error();
    double r = std::pow(x, y);
    if (std::isinf(r) && std::isfinite(x) && std::isfinite(y)) raise_fault("OverflowError", "math range error");
    return Value::number(r);
  });
  add_fn(*m, "floor", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("floor", a, {"x"}, 1);
    if (!p[0]->is_float() && p[0]->is_numeric()) return Value::integer(p[0]->as_int());
    return float_to_int_value(std::floor(num(*p[0])));
  });
  add_fn(*m, "ceil", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("ceil", a, {"x"}, 1);
    if (!p[0]->is_float() && p[0]->is_numeric()) return Value::integer(p[0]->as_int());
    return float_to_int_value(std::ceil(num(*p[0])));
  });
  add_fn(*m, "trunc", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("trunc", a, {"x"}, 1);
    if (!p[0]->is_float() && p[0]->is_numeric()) return Value::integer(p[0]->as_int());
    return float_to_int_value(std::trunc(num(*p[0])));
  });
  add_fn(*m, "atan2", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("atan2", a, {"y", "x"}, 2);
    return Value::number(std::atan2(num(*p[0]), num(*p[1])));
  });
  add_fn(*m, "hypot", [](Interpreter&, CallArgs& a) {
    double acc = 0.0;
    for (const auto& v : a.positional) acc = std::hypot(acc, num(v));
    return Value::number(acc);
  });
  add_fn(*m, "dist", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("dist", a, {"p", "q"}, 2);
    auto x = numbers_of(in, *p[0]), y = numbers_of(in, *p[1]);
    if (x.size() != y.size()) raise_fault("ValueError", "both points must have the same number of dimensions");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc = std::hypot(acc, x[i] - y[i]);
    return Value::number(acc);
  });
  add_fn(*m, "copysign", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("copysign", a, {"x", "y"}, 2);
    return Value::number(std::copysign(num(*p[0]), num(*p[1])));
  });
  add_fn(*m, "fmod", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("fmod", a, {"x", "y"}, 2);
    double x = num(*p[0]), y = num(*p[1]);
    if (y == 0.0 || std::isinf(x)) domain_error();
    return Value::number(std::fmod(x, y));
  });
  add_fn(*m, "isnan", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("isnan", a, {"x"}, 1);
    return Value::boolean(std::isnan(num(*p[0])));
  });
  add_fn(*m, "isinf", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("isinf", a, {"x"}, 1);
    return Value::boolean(std::isinf(num(*p[0])));
  });
  add_fn(*m, "isfinite", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("isfinite", a, {"x"}, 1);
    return Value::boolean(std::isfinite(num(*p[0])));
  });
  add_fn(*m, "isclose", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("isclose", a, {"a", "b", "rel_tol", "abs_tol"}, 2);
    double x = num(*p[0]), y = num(*p[1]);
    double rel = p[2] ? num(*p[2]) : 1e-9, abs_tol = p[3] ? num(*p[3]) : 0.0;
    if (rel < 0 || abs_tol < 0) raise_fault("ValueError", "tolerances must be non-negative");
    if (x == y) return Value::boolean(true);
    if (std::isinf(x) || std::isinf(y)) return Value::boolean(false);
    double diff = std::fabs(y - x);
    return Value::boolean(diff <= std::fabs(rel * y) || diff <= std::fabs(rel * x) || diff <= abs_tol);
  });
  add_fn(*m, "fsum", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("fsum", a, {"seq"}, 1);
    return Value::number(exact_sum(numbers_of(in, *p[0])));
  });
  add_fn(*m, "prod", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("prod", a, {"iterable", "start"}, 1);
    Value acc = p[1] ? *p[1] : Value::integer(1);
    in.iterate(*p[0], [&](const Value& v) {
      if (!acc.is_numeric() || !v.is_numeric()) {
        raise_fault("TypeError", "unsupported operand type(s) for *: '" + acc.type_name() + "' and '" + v.type_name() + "'");
      }
      if (acc.is_float() || v.is_float()) acc = Value::number(acc.as_double() * v.as_double());
      else acc = Value::integer(checked_mul(acc.as_int(), v.as_int()));
      return true;
    });
    return acc;
  });
  add_fn(*m, "factorial", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("factorial", a, {"x"}, 1);
    std::int64_t n = expect_int(*p[0], "factorial() argument");
    if (n < 0) raise_fault("ValueError", "factorial() not defined for negative values");
    std::int64_t r = 1;
    for (std::int64_t i = 2; i <= n; ++i) r = checked_mul(r, i);
    return Value::integer(r);
  });
  add_fn(*m, "gcd", [](Interpreter&, CallArgs& a) {
    std::int64_t g = 0;
    for (const auto& v : a.positional) g = std::gcd(g, expect_int(v, "gcd() argument"));
    return Value::integer(g < 0 ? -g : g);
  });
  add_fn(*m, "lcm", [](Interpreter&, CallArgs& a) {
    std::int64_t l = 1;
    for (const auto& v : a.positional) {
      std::int64_t x = expect_int(v, "lcm() argument");
      if (x == 0) return Value::integer(0);
      l = checked_mul(l / std::gcd(l, x), x < 0 ? -x : x);
    }
    return Value::integer(l);
  });
  add_fn(*m, "comb", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("comb", a, {"n", "k"}, 2);
    std::int64_t n = expect_int(*p[0], "n"), k = expect_int(*p[1], "k");
    if (n < 0 || k < 0) raise_fault("ValueError", "n and k must be non-negative integers");
    if (k > n) return Value::integer(0);
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
      std::int64_t g = std::gcd(r, i);
      r = checked_mul(r / g, (n - k + i) / (i / g));
    }
    return Value::integer(r);
  });
  add_fn(*m, "perm", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("perm", a, {"n", "k"}, 1);
    std::int64_t n = expect_int(*p[0], "n");
    std::int64_t k = p[1] && !p[1]->is_none() ? expect_int(*p[1], "k") : n;
    if (n < 0 || k < 0) raise_fault("ValueError", "n and k must be non-negative integers");
    if (k > n) return Value::integer(0);
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < k; ++i) r = checked_mul(r, n - i);
    return Value::integer(r);
  });
  return m;
}

// ---- json -----------------------------------------------------------------

FileHandle& file_arg(const Value& v, const char* fname) {
  auto* f = v.is_object() ? dynamic_cast<FileHandle*>(v.as_object().get()) : nullptr;
  if (!f) raise_fault("TypeError", std::string(fname) + "() argument 'fp' must be a file object");
  return *f;
}

std::string dumps_impl(const Value& obj, const std::optional<Value>& indent, const std::optional<Value>& sort_keys,
                       const std::optional<Value>& ensure_ascii) {
  std::optional<int> ind;
  if (indent && !indent->is_none()) {
    ind = static_cast<int>(std::clamp<std::int64_t>(expect_int(*indent, "indent"), 0, 64));
  }
  return python_json_dumps(obj, ind, sort_keys && truthy(*sort_keys), !ensure_ascii || truthy(*ensure_ascii));
}

std::shared_ptr<ModuleObject> build_json() {
  auto m = std::make_shared<ModuleObject>("json");
  add_fn(*m, "dumps", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("dumps", a, {"obj", "indent", "sort_keys", "ensure_ascii", "default"}, 1);
    if (p[4] && !p[4]->is_none()) {
      auto fallback = *p[4];
      (void)fallback;
      raise_fault("TypeError", "json.dumps(default=...) is not supported");
    }
    std::string s = dumps_impl(*p[0], p[1], p[2], p[3]);
    in.check_string(s.size());
    return Value::string(std::move(s));
  });
  add_fn(*m, "dump", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("dump", a, {"obj", "fp", "indent", "sort_keys", "ensure_ascii"}, 2);
    auto& f = file_arg(*p[1], "dump");
    f.write(dumps_impl(*p[0], p[2], p[3], p[4]));
    return Value::none();
  });
  add_fn(*m, "loads", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("loads", a, {"s"}, 1);
    if (!p[0]->is_str()) {
      raise_fault("TypeError", "the JSON object must be str, bytes or bytearray, not " + p[0]->type_name());
    }
    return python_json_loads(p[0]->as_str());
  });
  add_fn(*m, "load", [](Interpreter&, CallArgs& a) {
    auto p = bind_arguments("load", a, {"fp"}, 1);
    return python_json_loads(file_arg(*p[0], "load").read_all());
  });
  m->set("JSONDecodeError", Value::callable(std::make_shared<ExceptionType>("JSONDecodeError")));
  return m;
}

// ---- random ---------------------------------------------------------------

std::int64_t randrange(Interpreter& in, std::int64_t start, std::optional<std::int64_t> stop, std::int64_t step) {
  auto& rng = in.random();
  if (!stop) {
    if (start <= 0) raise_fault("ValueError", "empty range for randrange()");
    return static_cast<std::int64_t>(rng.randbelow(static_cast<std::uint64_t>(start)));
  }
  std::int64_t width = checked_sub(*stop, start);
  if (step == 1) {
    if (width <= 0) {
      raise_fault("ValueError", "empty range for randrange() (" + std::to_string(start) + ", " +
                                    std::to_string(*stop) + ", " + std::to_string(width) + ")");
    }
    return start + static_cast<std::int64_t>(rng.randbelow(static_cast<std::uint64_t>(width)));
  }
  if (step == 0) raise_fault("ValueError", "zero step for randrange()");
  std::int64_t n = step > 0 ? (width + step - 1) / step : (width + step + 1) / step;
  if (n <= 0) raise_fault("ValueError", "empty range for randrange()");
  return start + step * static_cast<std::int64_t>(rng.randbelow(static_cast<std::uint64_t>(n)));
}

std::shared_ptr<ModuleObject> build_random() {
  auto m = std::make_shared<ModuleObject>("random");
  add_fn(*m, "seed", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("seed", a, {"a", "version"}, 0);
    std::int64_t s = 0;
    if (p[0] && !p[0]->is_none()) {
      if (p[0]->is_float()) {
        raise_fault("TypeError", "random.seed() accepts only integers in this environment");
      }
      s = expect_int(*p[0], "seed");
    } else {
      s = static_cast<std::int64_t>(in.limits().random_seed);
    }
    std::uint64_t mag = s < 0 ? 0 - static_cast<std::uint64_t>(s) : static_cast<std::uint64_t>(s);
    in.random().seed(mag);
    return Value::none();
  });
  add_fn(*m, "random", [](Interpreter& in, CallArgs& a) {
    bind_arguments("random", a, {}, 0);
    return Value::number(in.random().random());
  });
  add_fn(*m, "uniform", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("uniform", a, {"a", "b"}, 2);
    double lo = num(*p[0]), hi = num(*p[1]);
    return Value::number(lo + (hi - lo) * in.random().random());
  });
  add_fn(*m, "randint", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("randint", a, {"a", "b"}, 2);
    std::int64_t lo = expect_int(*p[0], "a"), hi = expect_int(*p[1], "b");
    return Value::integer(randrange(in, lo, checked_add(hi, 1), 1));
  });
  add_fn(*m, "randrange", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("randrange", a, {"start", "stop", "step"}, 1);
    std::int64_t start = expect_int(*p[0], "start");
    std::optional<std::int64_t> stop;
    if (p[1] && !p[1]->is_none()) stop = expect_int(*p[1], "stop");
    std::int64_t step = p[2] ? expect_int(*p[2], "step") : 1;
    if (!stop && step != 1) raise_fault("TypeError", "Missing a non-None stop argument");
    return Value::integer(randrange(in, start, stop, step));
  });
  add_fn(*m, "getrandbits", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("getrandbits", a, {"k"}, 1);
    std::int64_t k = expect_int(*p[0], "k");
    if (k < 0) raise_fault("ValueError", "number of bits must be non-negative");
    if (k > 63) raise_fault("OverflowError", "integer overflow (integers are limited to 64 bits)");
    return Value::integer(static_cast<std::int64_t>(in.random().getrandbits(static_cast<int>(k))));
  });
  add_fn(*m, "choice", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("choice", a, {"seq"}, 1);
    if (p[0]->is_dict()) raise_fault("TypeError", "'dict' object is not a sequence");
    auto items = in.to_vector(*p[0]);
    if (items.empty()) raise_fault("IndexError", "Cannot choose from an empty sequence");
    return items[in.random().randbelow(items.size())];
  });
  add_fn(*m, "shuffle", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("shuffle", a, {"x"}, 1);
    if (!p[0]->is_list()) raise_fault("TypeError", "shuffle() requires a list");
    auto& items = p[0]->as_list().items;
    for (std::size_t i = items.size(); i-- > 1;) {
      std::size_t j = in.random().randbelow(i + 1);
      std::swap(items[i], items[j]);
    }
    return Value::none();
  });
  add_fn(*m, "sample", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("sample", a, {"population", "k"}, 2);
    if (p[0]->is_dict()) {
      raise_fault("TypeError", "Population must be a sequence.  For dicts or sets, use sorted(d).");
    }
    auto pop = in.to_vector(*p[0]);
    std::int64_t k = expect_int(*p[1], "k");
    auto n = static_cast<std::int64_t>(pop.size());
    if (k < 0 || k > n) raise_fault("ValueError", "Sample larger than population or is negative");
    std::vector<Value> result(static_cast<std::size_t>(k));
    std::int64_t setsize = 21;
    if (k > 5) {
      setsize += static_cast<std::int64_t>(std::pow(4.0, std::ceil(std::log(k * 3.0) / std::log(4.0))));
    }
    auto& rng = in.random();
    if (n <= setsize) {
      std::vector<Value> pool = pop;
      for (std::int64_t i = 0; i < k; ++i) {
        auto j = static_cast<std::size_t>(rng.randbelow(static_cast<std::uint64_t>(n - i)));
        result[static_cast<std::size_t>(i)] = pool[j];
        pool[j] = pool[static_cast<std::size_t>(n - i - 1)];
      }
    } else {
      std::vector<bool> selected(pop.size(), false);
      for (std::int64_t i = 0; i < k; ++i) {
        auto j = static_cast<std::size_t>(rng.randbelow(static_cast<std::uint64_t>(n)));
        while (selected[j]) j = static_cast<std::size_t>(rng.randbelow(static_cast<std::uint64_t>(n)));
        selected[j] = true;
        result[static_cast<std::size_t>(i)] = pop[j];
      }
    }
    return Value::list(std::move(result));
  });
  add_fn(*m, "gauss", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("gauss", a, {"mu", "sigma"}, 0);
    double mu = p[0] ? num(*p[0]) : 0.0, sigma = p[1] ? num(*p[1]) : 1.0;
    return Value::number(in.random().gauss(mu, sigma));
  });
  return m;
}

// ---- statistics -----------------------------------------------------------

[[noreturn]] void stats_error(const std::string& msg) { raise_fault("StatisticsError", msg); }

struct Data {
  std::vector<Value> values;
  bool all_int = true;
};

Data data_of(Interpreter& in, const Value& iterable) {
  Data d;
  d.values = in.to_vector(iterable);
  for (const auto& v : d.values) {
    if (!v.is_numeric()) {
      raise_fault("TypeError", "can't convert type '" + v.type_name() + "' to numerator/denominator");
    }
    if (v.is_float()) d.all_int = false;
  }
  return d;
}

/// Exact rational p/q as an int when integral, else the nearest double.
Value rational(__int128 p, __int128 q) {
  if (q < 0) {
    p = -p;
    q = -q;
  }
  if (p % q == 0) {
    __int128 r = p / q;
    if (r > INT64_MAX || r < INT64_MIN) return Value::number(static_cast<double>(r));
    return Value::integer(static_cast<std::int64_t>(r));
  }
  // Long division keeps the result correctly rounded for realistic sizes.
  long double v = static_cast<long double>(p) / static_cast<long double>(q);
  return Value::number(static_cast<double>(v));
}

bool int_sums(const std::vector<Value>& xs, __int128& sum, __int128& sumsq) {
  sum = 0;
  sumsq = 0;
  constexpr __int128 kLimit = static_cast<__int128>(1) << 100;
  for (const auto& v : xs) {
    __int128 x = v.as_int();
    sum += x;
    sumsq += x * x;
    if (sumsq > kLimit || sum > kLimit || sum < -kLimit) return false;
  }
  return true;
}

double float_mean(const std::vector<Value>& xs) {
  std::vector<double> d;
  for (const auto& v : xs) d.push_back(v.as_double());
  return exact_sum(d) / static_cast<double>(d.size());
}

Value mean_of(const Data& d) {
  if (d.values.empty()) stats_error("mean requires at least one data point");
  __int128 s, ss;
  if (d.all_int && int_sums(d.values, s, ss)) return rational(s, static_cast<__int128>(d.values.size()));
  return Value::number(float_mean(d.values));
}

/// Sum of squared deviations: exact for ints, compensated for floats.
Value variance_of(const Data& d, bool sample) {
  std::size_t n = d.values.size();
  if (sample && n < 2) stats_error("variance requires at least two data points");
  if (!sample && n < 1) stats_error("pvariance requires at least one data point");
  auto nn = static_cast<__int128>(n);
  __int128 s, ss;
  if (d.all_int && int_sums(d.values, s, ss)) {
    __int128 num = nn * ss - s * s;
    __int128 den = nn * (sample ? nn - 1 : nn);
    return rational(num, den);
  }
  double c = float_mean(d.values);
  std::vector<double> dev, sq;
  for (const auto& v : d.values) {
    double x = v.as_double() - c;
    dev.push_back(x);
    sq.push_back(x * x);
  }
  double total = exact_sum(dev);
  double sum_sq = exact_sum(sq) - total * total / static_cast<double>(n);
  return Value::number(sum_sq / static_cast<double>(sample ? n - 1 : n));
}

std::vector<Value> sorted_numbers(const Data& d) {
  std::vector<Value> xs = d.values;
  std::stable_sort(xs.begin(), xs.end(), [](const Value& a, const Value& b) { return a.as_double() < b.as_double(); });
  return xs;
}

Value half(const Value& a, const Value& b) {
  return Value::number((a.as_double() + b.as_double()) / 2.0);
}

std::shared_ptr<ModuleObject> build_statistics() {
  auto m = std::make_shared<ModuleObject>("statistics");
  add_fn(*m, "mean", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("mean", a, {"data"}, 1);
    return mean_of(data_of(in, *p[0]));
  });
  add_fn(*m, "fmean", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("fmean", a, {"data"}, 1);
    auto d = data_of(in, *p[0]);
    if (d.values.empty()) stats_error("fmean requires at least one data point");
    return Value::number(float_mean(d.values));
  });
  add_fn(*m, "median", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("median", a, {"data"}, 1);
    auto xs = sorted_numbers(data_of(in, *p[0]));
    if (xs.empty()) stats_error("no median for empty data");
    std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return half(xs[n / 2 - 1], xs[n / 2]);
  });
  add_fn(*m, "median_low", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("median_low", a, {"data"}, 1);
    auto xs = sorted_numbers(data_of(in, *p[0]));
    if (xs.empty()) stats_error("no median for empty data");
    std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : xs[n / 2 - 1];
  });
  add_fn(*m, "median_high", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("median_high", a, {"data"}, 1);
    auto xs = sorted_numbers(data_of(in, *p[0]));
    if (xs.empty()) stats_error("no median for empty data");
    return xs[xs.size() / 2];
  });
  add_fn(*m, "mode", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("mode", a, {"data"}, 1);
    auto xs = in.to_vector(*p[0]);
    if (xs.empty()) stats_error("no mode for empty data");
    std::vector<std::pair<Value, std::size_t>> counts;
    for (const auto& v : xs) {
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return equals(c.first, v); });
      if (it == counts.end()) counts.emplace_back(v, 1);
      else ++it->second;
    }
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    return best->first;
  });
  add_fn(*m, "variance", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("variance", a, {"data", "xbar"}, 1);
    return variance_of(data_of(in, *p[0]), true);
  });
  add_fn(*m, "pvariance", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("pvariance", a, {"data", "mu"}, 1);
    return variance_of(data_of(in, *p[0]), false);
  });
  add_fn(*m, "stdev", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("stdev", a, {"data", "xbar"}, 1);
    return Value::number(std::sqrt(variance_of(data_of(in, *p[0]), true).as_double()));
  });
  add_fn(*m, "pstdev", [](Interpreter& in, CallArgs& a) {
    auto p = bind_arguments("pstdev", a, {"data", "mu"}, 1);
    return Value::number(std::sqrt(variance_of(data_of(in, *p[0]), false).as_double()));
  });
  m->set("StatisticsError", Value::callable(std::make_shared<ExceptionType>("StatisticsError")));
  return m;
}

std::shared_ptr<ModuleObject> build_pathlib() {
  auto m = std::make_shared<ModuleObject>("pathlib");
  auto ctor = Value::callable(std::make_shared<TypeObject>("Path", path_ctor));
  m->set("Path", ctor);
  m->set("PosixPath", ctor);
  m->set("PurePath", ctor);
  return m;
}

}  // namespace

const std::vector<std::string>& shim_module_names() {
  static const std::vector<std::string> names{"json", "math", "pathlib", "random", "statistics"};
  return names;
}

Value make_module(std::string_view name) {
  static const std::map<std::string, Value, std::less<>> modules{
      {"json", Value::object(build_json())},
      {"math", Value::object(build_math())},
      {"pathlib", Value::object(build_pathlib())},
      {"random", Value::object(build_random())},
      {"statistics", Value::object(build_statistics())},
  };
  auto it = modules.find(name);
  if (it == modules.end()) raise_fault("ModuleNotFoundError", "No module named '" + std::string(name) + "'");
  return it->second;
}

Value make_path(std::string p) { return Value::object(std::make_shared<PathObject>(std::move(p))); }

std::optional<std::string> path_string(const Value& v) {
  if (!v.is_object()) return std::nullopt;
  if (auto* p = dynamic_cast<PathObject*>(v.as_object().get())) return p->path();
  return std::nullopt;
}

}  // namespace pathagent::script
