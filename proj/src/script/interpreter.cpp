#include "pathagent/script/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "internal.hpp"
#include "pathagent/script/errors.hpp"
#include "pathagent/script/format.hpp"

namespace fs = std::filesystem;

namespace pathagent::script {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Raised by the runtime import check (the static gate normally fires first).
struct ImportGateError {
  ErrorKind kind;
  std::string message;
};

std::string top_level(const std::string& module) { return module.substr(0, module.find('.')); }

std::string join_names(const std::set<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::optional<ImportGateError> gate(const std::string& module, const InterpreterLimits& limits) {
  auto top = top_level(module);
  if (limits.forbidden_imports.count(top) || limits.forbidden_imports.count(module)) {
    return ImportGateError{ErrorKind::ForbiddenImport,
                           "import of '" + top + "' is forbidden in this environment"};
  }
  if (!limits.allowed_imports.count(top)) {
    return ImportGateError{ErrorKind::UnknownImport,
                           "no module named '" + top + "' (available modules: " +
                               join_names(limits.allowed_imports) + ")"};
  }
  return std::nullopt;
}

void scan_imports(const Block& block, const InterpreterLimits& limits,
                  std::optional<ExecutionError>& found) {
  for (const auto& s : block) {
    if (found) return;
    auto report = [&](const std::string& module) {
      if (found) return;
      if (auto g = gate(module, limits)) {
        found = ExecutionError{g->kind, g->message, s->span.line, std::nullopt};
      }
    };
    std::visit(overloaded{
                   [&](const ast::Import& i) {
                     for (const auto& a : i.names) report(a.name);
                   },
                   [&](const ast::ImportFrom& i) { report(i.module); },
                   [&](const ast::If& i) {
                     scan_imports(i.body, limits, found);
                     scan_imports(i.orelse, limits, found);
                   },
                   [&](const ast::For& f) { scan_imports(f.body, limits, found); },
                   [&](const ast::While& w) { scan_imports(w.body, limits, found); },
                   [&](const ast::FunctionDef& f) { scan_imports(f.body, limits, found); },
                   [&](const ast::Try& t) {
                     scan_imports(t.body, limits, found);
                     scan_imports(t.handler, limits, found);
                   },
                   [](const auto&) {},
               },
               s->node);
  }
}

// ---- arithmetic -----------------------------------------------------------

[[noreturn]] void unsupported_operand(const char* op, const Value& a, const Value& b) {
  raise_fault("TypeError", std::string("unsupported operand type(s) for ") + op + ": '" +
                               a.type_name() + "' and '" + b.type_name() + "'");
}

double float_floordiv(double vx, double wx, bool want_mod) {
  double mod = std::fmod(vx, wx);
  double div = (vx - mod) / wx;
  if (mod != 0.0) {
    if ((wx < 0) != (mod < 0)) {
      mod += wx;
      div -= 1.0;
    }
  } else {
    mod = std::copysign(0.0, wx);
  }
  double floordiv;
  if (div != 0.0) {
    floordiv = std::floor(div);
    if (div - floordiv > 0.5) floordiv += 1.0;
  } else {
    floordiv = std::copysign(0.0, vx / wx);
  }
  return want_mod ? mod : floordiv;
}

std::int64_t int_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t result = 1;
  while (exp > 0) {
    if (exp & 1) result = checked_mul(result, base);
    exp >>= 1;
    if (exp > 0) base = checked_mul(base, base);
  }
  return result;
}

Value float_pow(double x, double y) {
  if (x == 0.0 && y < 0.0) {
    raise_fault("ZeroDivisionError", "0.0 cannot be raised to a negative power");
  }
  if (x < 0.0 && std::isfinite(y) && y != std::floor(y)) {
    raise_fault("ValueError", "negative number cannot be raised to a fractional power");
  }
  double r = std::pow(x, y);
  if (std::isinf(r) && std::isfinite(x) && std::isfinite(y)) {
    raise_fault("OverflowError", "(34, 'Numerical result out of range')");
  }
  return Value::number(r);
}

Value repeat_sequence(Interpreter& in, const Value& seq, std::int64_t n) {
  if (n < 0) n = 0;
  if (seq.is_str()) {
    const auto& s = seq.as_str();
    if (!s.empty() && static_cast<std::uint64_t>(n) > in.limits().max_string_bytes / s.size()) {
      raise_fault("MemoryError", "string too large");
    }
    std::string out;
    out.reserve(s.size() * static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out += s;
    return Value::string(std::move(out));
  }
  const auto& items = seq.is_list() ? seq.as_list().items : seq.as_tuple().items;
  if (!items.empty() &&
      static_cast<std::uint64_t>(n) > in.limits().max_sequence_length / items.size()) {
    raise_fault("MemoryError", "sequence too large");
  }
  std::vector<Value> out;
  out.reserve(items.size() * static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) out.insert(out.end(), items.begin(), items.end());
  return seq.is_list() ? Value::list(std::move(out)) : Value::tuple(std::move(out));
}

Value binary_op(Interpreter& in, BinaryOp op, const Value& a, const Value& b) {
  const char* sym = to_string(op);
  if (a.is_numeric() && b.is_numeric()) {
    bool bit_op = op == BinaryOp::BitAnd || op == BinaryOp::BitOr || op == BinaryOp::BitXor ||
                  op == BinaryOp::LShift || op == BinaryOp::RShift;
    if (bit_op) {
      if (a.is_float() || b.is_float()) unsupported_operand(sym, a, b);
      std::int64_t x = a.as_int(), y = b.as_int();
      switch (op) {
        case BinaryOp::BitAnd:
          return a.is_bool() && b.is_bool() ? Value::boolean(x & y) : Value::integer(x & y);
        case BinaryOp::BitOr:
          return a.is_bool() && b.is_bool() ? Value::boolean(x | y) : Value::integer(x | y);
        case BinaryOp::BitXor:
          return a.is_bool() && b.is_bool() ? Value::boolean(x ^ y) : Value::integer(x ^ y);
        case BinaryOp::LShift: {
          if (y < 0) raise_fault("ValueError", "negative shift count");
          if (x == 0) return Value::integer(0);
          if (y >= 63) raise_fault("OverflowError", "integer overflow (integers are limited to 64 bits)");
          std::int64_t r = static_cast<std::int64_t>(static_cast<std::uint64_t>(x) << y);
          if ((r >> y) != x) {
            raise_fault("OverflowError", "integer overflow (integers are limited to 64 bits)");
          }
          return Value::integer(r);
        }
        default: {
          if (y < 0) raise_fault("ValueError", "negative shift count");
          if (y >= 64) return Value::integer(x < 0 ? -1 : 0);
          return Value::integer(x >> y);
        }
      }
    }
    if (a.is_float() || b.is_float() || op == BinaryOp::Div) {
      double x = a.as_double(), y = b.as_double();
      switch (op) {
        case BinaryOp::Add: return Value::number(x + y);
        case BinaryOp::Sub: return Value::number(x - y);
        case BinaryOp::Mul: return Value::number(x * y);
        case BinaryOp::Div:
          if (y == 0.0) {
            raise_fault("ZeroDivisionError",
                        a.is_float() || b.is_float() ? "float division by zero" : "division by zero");
          }
          return Value::number(x / y);
        case BinaryOp::FloorDiv:
          if (y == 0.0) raise_fault("ZeroDivisionError", "float floor division by zero");
          return Value::number(float_floordiv(x, y, false));
        case BinaryOp::Mod:
          if (y == 0.0) raise_fault("ZeroDivisionError", "float modulo");
          return Value::number(float_floordiv(x, y, true));
        case BinaryOp::Pow: return float_pow(x, y);
        default: unsupported_operand(sym, a, b);
      }
    }
    std::int64_t x = a.as_int(), y = b.as_int();
    switch (op) {
      case BinaryOp::Add: return Value::integer(checked_add(x, y));
      case BinaryOp::Sub: return Value::integer(checked_sub(x, y));
      case BinaryOp::Mul: return Value::integer(checked_mul(x, y));
      case BinaryOp::FloorDiv: {
        if (y == 0) raise_fault("ZeroDivisionError", "integer division or modulo by zero");
        if (x == INT64_MIN && y == -1) {
          raise_fault("OverflowError", "integer overflow (integers are limited to 64 bits)");
        }
        std::int64_t q = x / y;
        if ((x % y != 0) && ((x < 0) != (y < 0))) --q;
        return Value::integer(q);
      }
      case BinaryOp::Mod: {
        if (y == 0) raise_fault("ZeroDivisionError", "integer division or modulo by zero");
        if (y == -1) return Value::integer(0);
        std::int64_t r = x % y;
        if (r != 0 && ((r < 0) != (y < 0))) r += y;
        return Value::integer(r);
      }
      case BinaryOp::Pow:
        if (y < 0) return float_pow(static_cast<double>(x), static_cast<double>(y));
        return Value::integer(int_pow(x, y));
      default: unsupported_operand(sym, a, b);
    }
  }

  switch (op) {
    case BinaryOp::Add:
      if (a.is_str()) {
        if (!b.is_str()) {
          raise_fault("TypeError",
                      "can only concatenate str (not \"" + b.type_name() + "\") to str");
        }
        in.check_string(a.as_str().size() + b.as_str().size());
        return Value::string(a.as_str() + b.as_str());
      }
      if (a.is_list() && b.is_list()) {
        std::vector<Value> out = a.as_list().items;
        const auto& rhs = b.as_list().items;
        in.check_length(out.size() + rhs.size());
        out.insert(out.end(), rhs.begin(), rhs.end());
        return Value::list(std::move(out));
      }
      if (a.is_list()) {
        raise_fault("TypeError",
                    "can only concatenate list (not \"" + b.type_name() + "\") to list");
      }
      if (a.is_tuple() && b.is_tuple()) {
        std::vector<Value> out = a.as_tuple().items;
        const auto& rhs = b.as_tuple().items;
        in.check_length(out.size() + rhs.size());
        out.insert(out.end(), rhs.begin(), rhs.end());
        return Value::tuple(std::move(out));
      }
      break;
    case BinaryOp::Mul:
      if ((a.is_str() || a.is_list() || a.is_tuple()) && b.is_numeric() && !b.is_float()) {
        return repeat_sequence(in, a, b.as_int());
      }
      if ((b.is_str() || b.is_list() || b.is_tuple()) && a.is_numeric() && !a.is_float()) {
        return repeat_sequence(in, b, a.as_int());
      }
      break;
    case BinaryOp::Mod:
      if (a.is_str()) return Value::string(percent_format(a.as_str(), b));
      break;
    case BinaryOp::Div:
      if (auto p = path_string(a)) {
        if (auto q = path_string(b)) return make_path((fs::path(*p) / *q).generic_string());
        if (b.is_str()) return make_path((fs::path(*p) / b.as_str()).generic_string());
      }
      if (a.is_str()) {
        if (auto q = path_string(b)) return make_path((fs::path(a.as_str()) / *q).generic_string());
      }
      break;
    case BinaryOp::BitOr:
      if (a.is_dict() && b.is_dict()) {
        auto d = std::make_shared<DictObject>(a.as_dict());
        for (const auto& [k, v] : b.as_dict().entries()) d->set(*to_dict_key(k), v);
        return Value::dict(std::move(d));
      }
      break;
    default: break;
  }
  unsupported_operand(sym, a, b);
}

// ---- comparison -----------------------------------------------------------

bool compare_order(CompareOp op, const Value& a, const Value& b);

template <typename T>
bool apply_order(CompareOp op, const T& x, const T& y) {
  switch (op) {
    case CompareOp::Lt: return x < y;
    case CompareOp::LtE: return x <= y;
    case CompareOp::Gt: return x > y;
    case CompareOp::GtE: return x >= y;
    default: return false;
  }
}

bool sequence_order(CompareOp op, const std::vector<Value>& x, const std::vector<Value>& y) {
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!equals(x[i], y[i])) return compare_order(op, x[i], y[i]);
  }
  return apply_order(op, x.size(), y.size());
}

bool compare_order(CompareOp op, const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_float() || b.is_float()) return apply_order(op, a.as_double(), b.as_double());
    return apply_order(op, a.as_int(), b.as_int());
  }
  if (a.is_str() && b.is_str()) return apply_order(op, a.as_str(), b.as_str());
  if (auto pa = path_string(a)) {
    if (auto pb = path_string(b)) return apply_order(op, *pa, *pb);
  }
  if (a.is_list() && b.is_list()) return sequence_order(op, a.as_list().items, b.as_list().items);
  if (a.is_tuple() && b.is_tuple()) {
    return sequence_order(op, a.as_tuple().items, b.as_tuple().items);
  }
  raise_fault("TypeError", std::string("'") + to_string(op) +
                               "' not supported between instances of '" + a.type_name() +
                               "' and '" + b.type_name() + "'");
}

bool contains(Interpreter& in, const Value& container, const Value& item) {
  switch (container.kind()) {
    case Value::Kind::Str:
      if (!item.is_str()) {
        raise_fault("TypeError", "'in <string>' requires string as left operand, not " +
                                     item.type_name());
      }
      return container.as_str().find(item.as_str()) != std::string::npos;
    case Value::Kind::List:
      for (const auto& v : container.as_list().items) {
        if (equals(v, item)) return true;
      }
      return false;
    case Value::Kind::Tuple:
      for (const auto& v : container.as_tuple().items) {
        if (equals(v, item)) return true;
      }
      return false;
    case Value::Kind::Dict: {
      if (item.is_list() || item.is_dict()) {
        raise_fault("TypeError", "unhashable type: '" + item.type_name() + "'");
      }
      auto key = to_dict_key(item);
      return key && container.as_dict().contains(*key);
    }
    case Value::Kind::Object: {
      if (auto* r = dynamic_cast<RangeObject*>(container.as_object().get())) {
        if (!item.is_numeric()) return false;
        if (item.is_float() && item.as_double() != std::floor(item.as_double())) return false;
        auto v = static_cast<std::int64_t>(item.as_double());
        if (r->step > 0 ? (v < r->start || v >= r->stop) : (v > r->start || v <= r->stop)) {
          return false;
        }
        return (v - r->start) % r->step == 0;
      }
      bool found = false;
      in.iterate(container, [&](const Value& v) {
        found = equals(v, item);
        return !found;
      });
      return found;
    }
    default:
      raise_fault("TypeError", "argument of type '" + container.type_name() + "' is not iterable");
  }
}

bool compare(Interpreter& in, CompareOp op, const Value& a, const Value& b) {
  switch (op) {
    case CompareOp::Eq: return equals(a, b);
    case CompareOp::NotEq: return !equals(a, b);
    case CompareOp::In: return contains(in, b, a);
    case CompareOp::NotIn: return !contains(in, b, a);
    case CompareOp::Is:
      return a.kind() == b.kind() && (a.is_none() || a.is_same(b));
    case CompareOp::IsNot:
      return !(a.kind() == b.kind() && (a.is_none() || a.is_same(b)));
    default: return compare_order(op, a, b);
  }
}

std::string dict_key_error(const Value& key) { return repr(key); }

DictKey require_key(const Value& key) {
  auto k = to_dict_key(key);
  if (!k) {
    if (key.is_list() || key.is_dict()) {
      raise_fault("TypeError", "unhashable type: '" + key.type_name() + "'");
    }
    raise_fault("TypeError", "unsupported dictionary key type: '" + key.type_name() +
                                 "' (keys must be str or int)");
  }
  return *k;
}

struct FrameScope {
  std::shared_ptr<Frame>& slot;
  std::shared_ptr<Frame> saved;
  FrameScope(std::shared_ptr<Frame>& s, std::shared_ptr<Frame> next)
      : slot(s), saved(std::move(s)) {
    slot = std::move(next);
  }
  ~FrameScope() { slot = std::move(saved); }
};

}  // namespace

// ---- public helpers -------------------------------------------------------

bool less_than(const Value& a, const Value& b) { return compare_order(CompareOp::Lt, a, b); }

void InterpreterLimits::validate() const {
  if (max_operations == 0) throw std::invalid_argument("max_operations must be positive");
  for (const auto& m : forbidden_imports) {
    if (allowed_imports.count(m)) {
      throw std::invalid_argument("module '" + m + "' is both allowed and forbidden");
    }
  }
  std::error_code ec;
  if (working_dir.empty() || !fs::is_directory(working_dir, ec)) {
    throw std::invalid_argument("working_dir does not exist: " + working_dir.string());
  }
  if (wall_clock_cap && !(*wall_clock_cap > 0)) {
    throw std::invalid_argument("wall_clock_cap must be positive");
  }
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ForbiddenImport: return "ForbiddenImport";
    case ErrorKind::UnknownImport: return "UnknownImport";
    case ErrorKind::OperationLimitExceeded: return "OperationLimitExceeded";
    case ErrorKind::RuntimeFault: return "RuntimeFault";
    case ErrorKind::SandboxViolation: return "SandboxViolation";
  }
  return "Error";
}

std::string ExecutionError::render() const {
  std::string out = to_string(kind);
  if (line && *line > 0) {
    out += " at line " + std::to_string(*line);
    if (column) out += ", column " + std::to_string(*column);
  }
  out += ": ";
  for (char c : message) out += (c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

std::optional<ExecutionError> check_imports(const ScriptProgram& program,
                                            const InterpreterLimits& limits) {
  std::optional<ExecutionError> found;
  scan_imports(program.body(), limits, found);
  return found;
}

// ---- Interpreter ----------------------------------------------------------

Interpreter::Interpreter(SessionState& session, const InterpreterLimits& limits,
                         std::shared_ptr<const Module> module)
    : session_(session),
      limits_(limits),
      module_(std::move(module)),
      sandbox_(limits.working_dir, limits.read_only_roots),
      frame_(session.globals),
      started_(std::chrono::steady_clock::now()) {}

Interpreter::~Interpreter() {
  for (auto& h : handles_) {
    if (auto* f = dynamic_cast<FileHandle*>(h.get())) {
      try {
        f->close();
      } catch (...) {
      }
    }
  }
}

void Interpreter::run() { exec_block(module_->body); }

void Interpreter::track_handle(std::shared_ptr<HostObject> handle) {
  handles_.push_back(std::move(handle));
}

void Interpreter::tick() {
  if (++ops_ > limits_.max_operations) {
    throw OperationLimitError("exceeded the limit of " + std::to_string(limits_.max_operations) +
                              " operations");
  }
  if (limits_.wall_clock_cap && (ops_ & 1023) == 0) {
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started_;
    if (elapsed.count() > *limits_.wall_clock_cap) {
      throw WallClockExceeded("execution exceeded the wall-clock cap");
    }
  }
}

void Interpreter::write_stdout(std::string_view text) {
  if (stdout_truncated_) return;
  if (stdout_.size() + text.size() > limits_.max_stdout_bytes) {
    stdout_.append(text.substr(0, limits_.max_stdout_bytes - stdout_.size()));
    stdout_ += "\n[output truncated]\n";
    stdout_truncated_ = true;
    return;
  }
  stdout_.append(text);
}

void Interpreter::check_length(std::size_t n) const {
  if (n > limits_.max_sequence_length) {
    raise_fault("MemoryError", "sequence of " + std::to_string(n) + " elements exceeds the limit of " +
                                   std::to_string(limits_.max_sequence_length));
  }
}

void Interpreter::check_string(std::size_t bytes) const {
  if (bytes > limits_.max_string_bytes) raise_fault("MemoryError", "string too large");
}

Value Interpreter::call(const Value& callee, CallArgs args) {
  if (!callee.is_callable()) {
    raise_fault("TypeError", "'" + callee.type_name() + "' object is not callable");
  }
  try {
    return callee.as_callable()->call(*this, std::move(args));
  } catch (const ScriptFault&) {
    throw;
  } catch (const FinalAnswerSignal&) {
    throw;
  } catch (const OperationLimitError&) {
    throw;
  } catch (const SandboxViolationError&) {
    throw;
  } catch (const WallClockExceeded&) {
    throw;
  } catch (const ImportGateError&) {
    throw;
  } catch (const fs::filesystem_error& e) {
    raise_fault("OSError", e.code().message());
  } catch (const std::bad_alloc&) {
    raise_fault("MemoryError", "out of memory");
  } catch (const std::exception& e) {
    raise_fault("RuntimeError", e.what());
  }
}

Value UserFunction::call(Interpreter& interp, CallArgs args) { return interp.call_user(*this, args); }

Value Interpreter::call_user(UserFunction& fn, CallArgs& args) {
  if (depth_ >= limits_.max_call_depth) {
    raise_fault("RecursionError", "maximum recursion depth exceeded");
  }
  const auto& params = fn.params->params;
  std::string fname = fn.name_ + "()";
  std::vector<std::optional<Value>> slots(params.size());
  std::vector<Value> extra;
  for (std::size_t i = 0; i < args.positional.size(); ++i) {
    if (i < params.size()) {
      slots[i] = std::move(args.positional[i]);
    } else if (!fn.params->vararg.empty()) {
      extra.push_back(std::move(args.positional[i]));
    } else {
      raise_fault("TypeError", fname + " takes " + std::to_string(params.size()) +
                                   " positional argument" + (params.size() == 1 ? "" : "s") +
                                   " but " + std::to_string(args.positional.size()) +
                                   (args.positional.size() == 1 ? " was" : " were") + " given");
    }
  }
  std::shared_ptr<DictObject> kwargs;
  if (!fn.params->kwarg.empty()) kwargs = std::make_shared<DictObject>();
  for (auto& [name, value] : args.keywords) {
    auto it = std::find_if(params.begin(), params.end(),
                           [&](const ast::Param& p) { return p.name == name; });
    if (it != params.end()) {
      auto idx = static_cast<std::size_t>(it - params.begin());
      if (slots[idx]) raise_fault("TypeError", fname + " got multiple values for argument '" + name + "'");
      slots[idx] = std::move(value);
    } else if (kwargs) {
      kwargs->set(name, std::move(value));
    } else {
      raise_fault("TypeError", fname + " got an unexpected keyword argument '" + name + "'");
    }
  }
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!slots[i]) {
      if (fn.defaults[i]) {
        slots[i] = fn.defaults[i];
      } else {
        missing.push_back("'" + params[i].name + "'");
      }
    }
  }
  if (!missing.empty()) {
    std::string names;
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (i > 0) names += (i + 1 == missing.size()) ? " and " : ", ";
      names += missing[i];
    }
    raise_fault("TypeError", fname + " missing " + std::to_string(missing.size()) +
                                 " required positional argument" +
                                 (missing.size() == 1 ? "" : "s") + ": " + names);
  }

  auto frame = std::make_shared<Frame>();
  frame->parent = fn.closure;
  for (std::size_t i = 0; i < params.size(); ++i) frame->vars[params[i].name] = std::move(*slots[i]);
  if (!fn.params->vararg.empty()) frame->vars[fn.params->vararg] = Value::tuple(std::move(extra));
  if (kwargs) frame->vars[fn.params->kwarg] = Value::dict(kwargs);

  FrameScope scope(frame_, std::move(frame));
  struct DepthGuard {
    std::size_t& d;
    int& line;
    int saved_line;
    explicit DepthGuard(std::size_t& depth, int& l) : d(depth), line(l), saved_line(l) { ++d; }
    ~DepthGuard() {
      --d;
      line = saved_line;
    }
  } guard(depth_, line_);

  if (fn.expr) return eval(*fn.expr);
  Flow flow = exec_block(*fn.body);
  if (flow == Flow::Return) {
    Value r = std::move(return_value_);
    return_value_ = Value::none();
    return r;
  }
  return Value::none();
}

Value Interpreter::make_function(const std::string& name,
                                 std::shared_ptr<const ast::Parameters> params, const Block* body,
                                 const Expr* expr) {
  auto fn = std::make_shared<UserFunction>();
  fn->name_ = name;
  for (const auto& p : params->params) {
    if (p.default_value) {
      fn->defaults.emplace_back(eval(*p.default_value));
    } else {
      fn->defaults.emplace_back(std::nullopt);
    }
  }
  fn->params = std::move(params);
  fn->body = body;
  fn->expr = expr;
  if (!frame_->module_level) fn->closure = frame_;
  fn->module = module_;
  return Value::callable(std::move(fn));
}

Value Interpreter::lookup(const std::string& name) {
  for (Frame* f = frame_.get(); f != nullptr; f = f->parent.get()) {
    if (f->global_names.count(name)) break;
    auto it = f->vars.find(name);
    if (it != f->vars.end()) return it->second;
  }
  auto& globals = session_.globals->vars;
  if (auto it = globals.find(name); it != globals.end()) return it->second;
  if (auto it = session_.bindings.find(name); it != session_.bindings.end()) return it->second;
  const auto& builtins = builtin_table();
  if (auto it = builtins.find(name); it != builtins.end()) return it->second;
  raise_fault("NameError", "name '" + name + "' is not defined");
}

void Interpreter::store(const std::string& name, Value value) {
  if (frame_->module_level || frame_->global_names.count(name)) {
    session_.globals->vars[name] = std::move(value);
  } else {
    frame_->vars[name] = std::move(value);
  }
}

// ---- iteration ------------------------------------------------------------

void Interpreter::iterate(const Value& iterable, const std::function<bool(const Value&)>& visit) {
  switch (iterable.kind()) {
    case Value::Kind::List: {
      auto list = iterable.list_ptr();
      for (std::size_t i = 0; i < list->items.size(); ++i) {
        Value v = list->items[i];
        if (!visit(v)) return;
      }
      return;
    }
    case Value::Kind::Tuple: {
      Value keep = iterable;
      for (const auto& v : keep.as_tuple().items) {
        if (!visit(v)) return;
      }
      return;
    }
    case Value::Kind::Str: {
      const std::string s = iterable.as_str();
      for (auto ch : utf8_chars(s)) {
        if (!visit(Value::string(std::string(ch)))) return;
      }
      return;
    }
    case Value::Kind::Dict: {
      std::vector<Value> keys;
      for (const auto& [k, v] : iterable.as_dict().entries()) keys.push_back(k);
      for (const auto& k : keys) {
        if (!visit(k)) return;
      }
      return;
    }
    case Value::Kind::Object: {
      auto obj = iterable.as_object();
      if (auto* r = dynamic_cast<RangeObject*>(obj.get())) {
        std::int64_t n = r->size();
        for (std::int64_t i = 0; i < n; ++i) {
          if (!visit(Value::integer(r->at(i)))) return;
        }
        return;
      }
      if (auto* it = dynamic_cast<IteratorObject*>(obj.get())) {
        while (it->pos < it->items.size()) {
          Value v = it->items[it->pos++];
          if (!visit(v)) return;
        }
        return;
      }
      if (auto* f = dynamic_cast<FileHandle*>(obj.get())) {
        for (auto& line : f->read_lines()) {
          if (!visit(Value::string(std::move(line)))) return;
        }
        return;
      }
      break;
    }
    default: break;
  }
  raise_fault("TypeError", "'" + iterable.type_name() + "' object is not iterable");
}

std::vector<Value> Interpreter::to_vector(const Value& iterable) {
  if (iterable.is_list()) return iterable.as_list().items;
  if (iterable.is_tuple()) return iterable.as_tuple().items;
  if (iterable.is_object()) {
    if (auto* r = dynamic_cast<RangeObject*>(iterable.as_object().get())) {
      check_length(static_cast<std::size_t>(r->size()));
    }
  }
  std::vector<Value> out;
  iterate(iterable, [&](const Value& v) {
    out.push_back(v);
    if ((out.size() & 0xFFFF) == 0) check_length(out.size());
    return true;
  });
  check_length(out.size());
  return out;
}

// ---- attributes and items -------------------------------------------------

Value Interpreter::get_attribute(const Value& obj, std::string_view name) {
  if (name.size() > 1 && name.substr(0, 2) == "__") {
    raise_fault("AttributeError", "access to attribute '" + std::string(name) + "' is not allowed");
  }
  if (obj.is_object()) {
    if (auto v = obj.as_object()->get_attr(*this, name)) return *v;
    if (auto* m = dynamic_cast<ModuleObject*>(obj.as_object().get())) {
      raise_fault("AttributeError",
                  "module '" + m->name() + "' has no attribute '" + std::string(name) + "'");
    }
  } else if (has_builtin_method(obj, name)) {
    return Value::callable(std::make_shared<BoundMethod>(obj, std::string(name)));
  }
  raise_fault("AttributeError",
              "'" + obj.type_name() + "' object has no attribute '" + std::string(name) + "'");
}

struct ItemKey {
  bool is_slice = false;
  Value index;
  Value lower, upper, step;
};

ItemKey Interpreter::eval_key(const Expr& index) {
  ItemKey key;
  if (const auto* s = std::get_if<ast::Slice>(&index.node)) {
    tick();
    key.is_slice = true;
    if (s->lower) key.lower = eval(*s->lower);
    if (s->upper) key.upper = eval(*s->upper);
    if (s->step) key.step = eval(*s->step);
  } else {
    key.index = eval(index);
  }
  return key;
}

namespace {

std::int64_t sequence_index(const Value& idx, const Value& seq) {
  if (!idx.is_int() && !idx.is_bool()) {
    raise_fault("TypeError", seq.type_name() + " indices must be integers or slices, not " +
                                 idx.type_name());
  }
  return idx.as_int();
}

Value get_item(Interpreter& in, const Value& obj, const ItemKey& key) {
  if (key.is_slice) {
    auto take = [&](auto size, auto&& at) {
      auto s = resolve_slice(key.lower, key.upper, key.step, size);
      std::vector<Value> out;
      out.reserve(s.length);
      for (std::size_t i = 0; i < s.length; ++i) {
        out.push_back(at(static_cast<std::size_t>(s.start + static_cast<std::int64_t>(i) * s.step)));
      }
      return out;
    };
    switch (obj.kind()) {
      case Value::Kind::List: {
        const auto& items = obj.as_list().items;
        return Value::list(take(items.size(), [&](std::size_t i) { return items[i]; }));
      }
      case Value::Kind::Tuple: {
        const auto& items = obj.as_tuple().items;
        return Value::tuple(take(items.size(), [&](std::size_t i) { return items[i]; }));
      }
      case Value::Kind::Str: {
        const auto& s = obj.as_str();
        std::string out;
        if (is_ascii(s)) {
          auto r = resolve_slice(key.lower, key.upper, key.step, s.size());
          for (std::size_t i = 0; i < r.length; ++i) {
            out += s[static_cast<std::size_t>(r.start + static_cast<std::int64_t>(i) * r.step)];
          }
        } else {
          auto chars = utf8_chars(s);
          auto r = resolve_slice(key.lower, key.upper, key.step, chars.size());
          for (std::size_t i = 0; i < r.length; ++i) {
            out += chars[static_cast<std::size_t>(r.start + static_cast<std::int64_t>(i) * r.step)];
          }
        }
        return Value::string(std::move(out));
      }
      case Value::Kind::Object:
        if (auto* r = dynamic_cast<RangeObject*>(obj.as_object().get())) {
          auto n = static_cast<std::size_t>(r->size());
          auto items = take(n, [&](std::size_t i) {
            return Value::integer(r->at(static_cast<std::int64_t>(i)));
          });
          in.check_length(items.size());
          return Value::list(std::move(items));
        }
        break;
      default: break;
    }
    raise_fault("TypeError", "'" + obj.type_name() + "' object is not subscriptable");
  }

  const Value& idx = key.index;
  switch (obj.kind()) {
    case Value::Kind::List:
    case Value::Kind::Tuple: {
      const auto& items = obj.is_list() ? obj.as_list().items : obj.as_tuple().items;
      auto i = sequence_index(idx, obj);
      if (!normalize_index(i, items.size())) {
        raise_fault("IndexError", obj.type_name() + " index out of range");
      }
      return items[static_cast<std::size_t>(i)];
    }
    case Value::Kind::Str: {
      const auto& s = obj.as_str();
      auto i = sequence_index(idx, obj);
      if (is_ascii(s)) {
        if (!normalize_index(i, s.size())) raise_fault("IndexError", "string index out of range");
        return Value::string(std::string(1, s[static_cast<std::size_t>(i)]));
      }
      auto chars = utf8_chars(s);
      if (!normalize_index(i, chars.size())) raise_fault("IndexError", "string index out of range");
      return Value::string(std::string(chars[static_cast<std::size_t>(i)]));
    }
    case Value::Kind::Dict: {
      auto k = require_key(idx);
      if (const Value* v = obj.as_dict().find(k)) return *v;
      raise_fault("KeyError", dict_key_error(idx));
    }
    case Value::Kind::Object:
      if (auto* r = dynamic_cast<RangeObject*>(obj.as_object().get())) {
        auto i = sequence_index(idx, obj);
        if (!normalize_index(i, static_cast<std::size_t>(r->size()))) {
          raise_fault("IndexError", "range object index out of range");
        }
        return Value::integer(r->at(i));
      }
      break;
    default: break;
  }
  raise_fault("TypeError", "'" + obj.type_name() + "' object is not subscriptable");
}

void set_item(Interpreter& in, const Value& obj, const ItemKey& key, const Value& value) {
  if (obj.is_dict()) {
    if (key.is_slice) raise_fault("TypeError", "unhashable type: 'slice'");
    obj.as_dict().set(require_key(key.index), value);
    return;
  }
  if (!obj.is_list()) {
    raise_fault("TypeError", "'" + obj.type_name() + "' object does not support item assignment");
  }
  auto& items = obj.as_list().items;
  if (!key.is_slice) {
    auto i = sequence_index(key.index, obj);
    if (!normalize_index(i, items.size())) {
      raise_fault("IndexError", "list assignment index out of range");
    }
    items[static_cast<std::size_t>(i)] = value;
    return;
  }
  auto repl = in.to_vector(value);
  auto s = resolve_slice(key.lower, key.upper, key.step, items.size());
  if (s.step == 1) {
    auto b = static_cast<std::size_t>(s.start);
    auto e = b + s.length;
    in.check_length(items.size() - s.length + repl.size());
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(b),
                items.begin() + static_cast<std::ptrdiff_t>(e));
    items.insert(items.begin() + static_cast<std::ptrdiff_t>(b), repl.begin(), repl.end());
    return;
  }
  if (repl.size() != s.length) {
    raise_fault("ValueError", "attempt to assign sequence of size " + std::to_string(repl.size()) +
                                  " to extended slice of size " + std::to_string(s.length));
  }
  for (std::size_t i = 0; i < s.length; ++i) {
    items[static_cast<std::size_t>(s.start + static_cast<std::int64_t>(i) * s.step)] = repl[i];
  }
}

void del_item(const Value& obj, const ItemKey& key) {
  if (obj.is_dict()) {
    if (key.is_slice) raise_fault("TypeError", "unhashable type: 'slice'");
    if (!obj.as_dict().erase(require_key(key.index))) {
      raise_fault("KeyError", dict_key_error(key.index));
    }
    return;
  }
  if (!obj.is_list()) {
    raise_fault("TypeError", "'" + obj.type_name() + "' object does not support item deletion");
  }
  auto& items = obj.as_list().items;
  if (!key.is_slice) {
    auto i = sequence_index(key.index, obj);
    if (!normalize_index(i, items.size())) {
      raise_fault("IndexError", "list assignment index out of range");
    }
    items.erase(items.begin() + i);
    return;
  }
  auto s = resolve_slice(key.lower, key.upper, key.step, items.size());
  std::vector<bool> drop(items.size(), false);
  for (std::size_t i = 0; i < s.length; ++i) {
    drop[static_cast<std::size_t>(s.start + static_cast<std::int64_t>(i) * s.step)] = true;
  }
  std::vector<Value> kept;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(items[i]));
  }
  items = std::move(kept);
}

}  // namespace

// ---- statements -----------------------------------------------------------

Interpreter::Flow Interpreter::exec_block(const Block& block) {
  for (const auto& s : block) {
    Flow f = exec(*s);
    if (f != Flow::Normal) return f;
  }
  return Flow::Normal;
}

Interpreter::Flow Interpreter::exec(const Stmt& stmt) {
  tick();
  line_ = stmt.span.line;
  try {
    return std::visit(
        overloaded{
            [&](const ast::ExprStmt& s) {
              eval(*s.value);
              return Flow::Normal;
            },
            [&](const ast::Assign& s) {
              Value v = eval(*s.value);
              for (const auto& t : s.targets) assign(*t, v);
              return Flow::Normal;
            },
            [&](const ast::AnnAssign& s) {
              if (s.value) assign(*s.target, eval(*s.value));
              return Flow::Normal;
            },
            [&](const ast::AugAssign& s) {
              exec_augassign(s);
              return Flow::Normal;
            },
            [&](const ast::If& s) {
              if (truthy(eval(*s.test))) return exec_block(s.body);
              return exec_block(s.orelse);
            },
            [&](const ast::For& s) { return exec_for(s); },
            [&](const ast::While& s) {
              while (truthy(eval(*s.test))) {
                Flow f = exec_block(s.body);
                if (f == Flow::Break) break;
                if (f == Flow::Return) return f;
              }
              return Flow::Normal;
            },
            [&](const ast::FunctionDef& s) {
              store(s.name, make_function(s.name, s.params, &s.body, nullptr));
              return Flow::Normal;
            },
            [&](const ast::Return& s) {
              return_value_ = s.value ? eval(*s.value) : Value::none();
              return Flow::Return;
            },
            [&](const ast::Break&) { return Flow::Break; },
            [&](const ast::Continue&) { return Flow::Continue; },
            [&](const ast::Pass&) { return Flow::Normal; },
            [&](const ast::Import&) {
              exec_import(stmt);
              return Flow::Normal;
            },
            [&](const ast::ImportFrom&) {
              exec_import(stmt);
              return Flow::Normal;
            },
            [&](const ast::Try& s) { return exec_try(s); },
            [&](const ast::Delete& s) {
              for (const auto& t : s.targets) delete_target(*t);
              return Flow::Normal;
            },
            [&](const ast::Assert& s) {
              if (!truthy(eval(*s.test))) {
                raise_fault("AssertionError", s.msg ? str(eval(*s.msg)) : "");
              }
              return Flow::Normal;
            },
            [&](const ast::Global& s) {
              if (!frame_->module_level) {
                for (const auto& n : s.names) frame_->global_names.insert(n);
              }
              return Flow::Normal;
            },
        },
        stmt.node);
  } catch (ScriptFault& f) {
    if (f.line() == 0) f.set_line(stmt.span.line);
    throw;
  }
}

Interpreter::Flow Interpreter::exec_for(const ast::For& node) {
  Value iterable = eval(*node.iter);
  Flow result = Flow::Normal;
  iterate(iterable, [&](const Value& v) {
    assign(*node.target, v);
    Flow f = exec_block(node.body);
    if (f == Flow::Break) return false;
    if (f == Flow::Return) {
      result = Flow::Return;
      return false;
    }
    return true;
  });
  return result;
}

Interpreter::Flow Interpreter::exec_try(const ast::Try& node) {
  std::optional<std::pair<std::string, std::string>> caught;
  int saved_depth_line = line_;
  try {
    return exec_block(node.body);
  } catch (const ScriptFault& f) {
    bool matches = true;
    if (node.handler_type) {
      line_ = node.handler_type->span.line;
      Value handler;
      try {
        handler = eval(*node.handler_type);
      } catch (ScriptFault& inner) {
        if (inner.line() == 0) inner.set_line(line_);
        throw;
      }
      auto name_of = [](const Value& v) -> std::string {
        if (v.is_callable()) {
          if (auto* e = dynamic_cast<ExceptionType*>(v.as_callable().get())) {
            return std::string(e->name());
          }
        }
        raise_fault("TypeError",
                    "catching classes that do not inherit from BaseException is not allowed");
      };
      matches = false;
      if (handler.is_tuple()) {
        for (const auto& h : handler.as_tuple().items) {
          matches = matches || exception_matches(f.type(), name_of(h));
        }
      } else {
        matches = exception_matches(f.type(), name_of(handler));
      }
    }
    if (!matches) throw;
    caught.emplace(f.type(), f.message());
  }
  line_ = saved_depth_line;
  if (!node.handler_name.empty()) {
    store(node.handler_name,
          Value::object(std::make_shared<ExceptionObject>(caught->first, caught->second)));
  }
  return exec_block(node.handler);
}

void Interpreter::check_module_allowed(const std::string& name) const {
  if (auto g = gate(name, limits_)) throw *g;
}

void Interpreter::exec_import(const Stmt& stmt) {
  auto load = [&](const std::string& name) {
    check_module_allowed(name);
    if (name.find('.') != std::string::npos) {
      raise_fault("ModuleNotFoundError", "No module named '" + name + "'");
    }
    return make_module(name);
  };
  if (const auto* imp = std::get_if<ast::Import>(&stmt.node)) {
    for (const auto& a : imp->names) {
      Value mod = load(a.name);
      store(a.asname.empty() ? a.name : a.asname, mod);
    }
    return;
  }
  const auto& from = std::get<ast::ImportFrom>(stmt.node);
  Value mod = load(from.module);
  for (const auto& a : from.names) {
    auto v = mod.as_object()->get_attr(*this, a.name);
    if (!v) {
      raise_fault("ImportError",
                  "cannot import name '" + a.name + "' from '" + from.module + "'");
    }
    store(a.asname.empty() ? a.name : a.asname, *v);
  }
}

void Interpreter::assign(const Expr& target, const Value& value) {
  if (const auto* n = std::get_if<ast::Name>(&target.node)) {
    store(n->id, value);
    return;
  }
  if (const auto* s = std::get_if<ast::Subscript>(&target.node)) {
    Value obj = eval(*s->value);
    set_item(*this, obj, eval_key(*s->index), value);
    return;
  }
  if (const auto* a = std::get_if<ast::Attribute>(&target.node)) {
    Value obj = eval(*a->value);
    raise_fault("AttributeError",
                "'" + obj.type_name() + "' object attribute '" + a->attr + "' is read-only");
  }
  const std::vector<ExprPtr>* elts = nullptr;
  if (const auto* t = std::get_if<ast::TupleDisplay>(&target.node)) elts = &t->elts;
  if (const auto* l = std::get_if<ast::ListDisplay>(&target.node)) elts = &l->elts;
  if (elts == nullptr) raise_fault("SyntaxError", "cannot assign to expression");

  std::vector<Value> items = to_vector(value);
  std::size_t star = elts->size();
  for (std::size_t i = 0; i < elts->size(); ++i) {
    if (std::holds_alternative<ast::Starred>((*elts)[i]->node)) star = i;
  }
  if (star == elts->size()) {
    if (items.size() < elts->size()) {
      raise_fault("ValueError", "not enough values to unpack (expected " +
                                    std::to_string(elts->size()) + ", got " +
                                    std::to_string(items.size()) + ")");
    }
    if (items.size() > elts->size()) {
      raise_fault("ValueError",
                  "too many values to unpack (expected " + std::to_string(elts->size()) + ")");
    }
    for (std::size_t i = 0; i < items.size(); ++i) assign(*(*elts)[i], items[i]);
    return;
  }
  std::size_t after = elts->size() - star - 1;
  if (items.size() < star + after) {
    raise_fault("ValueError", "not enough values to unpack (expected at least " +
                                  std::to_string(star + after) + ", got " +
                                  std::to_string(items.size()) + ")");
  }
  for (std::size_t i = 0; i < star; ++i) assign(*(*elts)[i], items[i]);
  std::vector<Value> middle(items.begin() + static_cast<std::ptrdiff_t>(star),
                            items.end() - static_cast<std::ptrdiff_t>(after));
  assign(*std::get<ast::Starred>((*elts)[star]->node).value, Value::list(std::move(middle)));
  for (std::size_t i = 0; i < after; ++i) {
    assign(*(*elts)[star + 1 + i], items[items.size() - after + i]);
  }
}

void Interpreter::exec_augassign(const ast::AugAssign& node) {
  auto inplace = [&](const Value& cur, const Value& rhs) -> Value {
    if (cur.is_list() && node.op == BinaryOp::Add) {
      auto extra = to_vector(rhs);
      auto& items = cur.as_list().items;
      check_length(items.size() + extra.size());
      items.insert(items.end(), extra.begin(), extra.end());
      return cur;
    }
    return binary_op(*this, node.op, cur, rhs);
  };
  if (const auto* n = std::get_if<ast::Name>(&node.target->node)) {
    Value cur = lookup(n->id);
    Value rhs = eval(*node.value);
    store(n->id, inplace(cur, rhs));
    return;
  }
  if (const auto* s = std::get_if<ast::Subscript>(&node.target->node)) {
    Value obj = eval(*s->value);
    ItemKey key = eval_key(*s->index);
    Value cur = get_item(*this, obj, key);
    Value rhs = eval(*node.value);
    set_item(*this, obj, key, inplace(cur, rhs));
    return;
  }
  const auto& a = std::get<ast::Attribute>(node.target->node);
  Value obj = eval(*a.value);
  raise_fault("AttributeError",
              "'" + obj.type_name() + "' object attribute '" + a.attr + "' is read-only");
}

void Interpreter::delete_target(const Expr& target) {
  if (const auto* n = std::get_if<ast::Name>(&target.node)) {
    bool global = frame_->module_level || frame_->global_names.count(n->id);
    auto& vars = global ? session_.globals->vars : frame_->vars;
    if (vars.erase(n->id) == 0) raise_fault("NameError", "name '" + n->id + "' is not defined");
    return;
  }
  if (const auto* s = std::get_if<ast::Subscript>(&target.node)) {
    Value obj = eval(*s->value);
    del_item(obj, eval_key(*s->index));
    return;
  }
  if (const auto* t = std::get_if<ast::TupleDisplay>(&target.node)) {
    for (const auto& e : t->elts) delete_target(*e);
    return;
  }
  if (const auto* l = std::get_if<ast::ListDisplay>(&target.node)) {
    for (const auto& e : l->elts) delete_target(*e);
    return;
  }
  raise_fault("AttributeError", "cannot delete attribute");
}

// ---- expressions ----------------------------------------------------------

std::vector<Value> Interpreter::eval_elements(const std::vector<ExprPtr>& elts) {
  std::vector<Value> out;
  out.reserve(elts.size());
  for (const auto& e : elts) {
    if (const auto* s = std::get_if<ast::Starred>(&e->node)) {
      tick();
      auto more = to_vector(eval(*s->value));
      check_length(out.size() + more.size());
      out.insert(out.end(), more.begin(), more.end());
    } else {
      out.push_back(eval(*e));
    }
  }
  return out;
}

Value Interpreter::eval(const Expr& expr) {
  tick();
  return std::visit(
      overloaded{
          [&](const ast::Name& n) { return lookup(n.id); },
          [&](const ast::Constant& c) {
            return std::visit(overloaded{
                                  [](std::monostate) { return Value::none(); },
                                  [](bool b) { return Value::boolean(b); },
                                  [](std::int64_t i) { return Value::integer(i); },
                                  [](double d) { return Value::number(d); },
                                  [](const std::string& s) { return Value::string(s); },
                              },
                              c.value);
          },
          [&](const ast::FString& f) { return eval_fstring(f); },
          [&](const ast::ListDisplay& l) { return Value::list(eval_elements(l.elts)); },
          [&](const ast::TupleDisplay& t) { return Value::tuple(eval_elements(t.elts)); },
          [&](const ast::DictDisplay& d) {
            auto dict = std::make_shared<DictObject>();
            for (const auto& [k, v] : d.items) {
              if (!k) {
                Value m = eval(*v);
                if (!m.is_dict()) {
                  raise_fault("TypeError", "'" + m.type_name() + "' object is not a mapping");
                }
                for (const auto& [mk, mv] : m.as_dict().entries()) dict->set(*to_dict_key(mk), mv);
                continue;
              }
              Value key = eval(*k);
              Value val = eval(*v);
              dict->set(require_key(key), std::move(val));
            }
            return Value::dict(std::move(dict));
          },
          [&](const ast::Binary& b) {
            Value l = eval(*b.left);
            Value r = eval(*b.right);
            return binary_op(*this, b.op, l, r);
          },
          [&](const ast::Unary& u) {
            Value v = eval(*u.operand);
            switch (u.op) {
              case UnaryOp::Not: return Value::boolean(!truthy(v));
              case UnaryOp::Neg:
                if (v.is_float()) return Value::number(-v.as_double());
                if (v.is_numeric()) return Value::integer(checked_sub(0, v.as_int()));
                raise_fault("TypeError", "bad operand type for unary -: '" + v.type_name() + "'");
              case UnaryOp::Pos:
                if (v.is_float()) return v;
                if (v.is_numeric()) return Value::integer(v.as_int());
                raise_fault("TypeError", "bad operand type for unary +: '" + v.type_name() + "'");
              case UnaryOp::Invert:
                if (v.is_numeric() && !v.is_float()) return Value::integer(~v.as_int());
                raise_fault("TypeError", "bad operand type for unary ~: '" + v.type_name() + "'");
            }
            return Value::none();
          },
          [&](const ast::BoolOp& b) {
            Value v;
            for (const auto& e : b.values) {
              v = eval(*e);
              bool t = truthy(v);
              if (b.op == BoolOpKind::And ? !t : t) return v;
            }
            return v;
          },
          [&](const ast::Compare& c) {
            Value left = eval(*c.left);
            for (std::size_t i = 0; i < c.ops.size(); ++i) {
              Value right = eval(*c.comparators[i]);
              if (!compare(*this, c.ops[i], left, right)) return Value::boolean(false);
              left = std::move(right);
            }
            return Value::boolean(true);
          },
          [&](const ast::IfExp& i) {
            return truthy(eval(*i.test)) ? eval(*i.body) : eval(*i.orelse);
          },
          [&](const ast::Call& c) { return eval_call(c); },
          [&](const ast::Starred&) -> Value {
            raise_fault("SyntaxError", "can't use starred expression here");
          },
          [&](const ast::Attribute& a) { return get_attribute(eval(*a.value), a.attr); },
          [&](const ast::Subscript& s) {
            Value obj = eval(*s.value);
            return get_item(*this, obj, eval_key(*s.index));
          },
          [&](const ast::Slice&) -> Value {
            raise_fault("SyntaxError", "slice outside of a subscript");
          },
          [&](const ast::ListComp&) { return eval_comprehension(expr); },
          [&](const ast::DictComp&) { return eval_comprehension(expr); },
          [&](const ast::Lambda& l) {
            return make_function("<lambda>", l.params, nullptr, l.body.get());
          },
      },
      expr.node);
}

Value Interpreter::eval_call(const ast::Call& node) {
  Value func = eval(*node.func);
  CallArgs args;
  args.positional = eval_elements(node.args);
  for (const auto& kw : node.keywords) {
    auto add = [&](const std::string& name, Value v) {
      for (const auto& [n, _] : args.keywords) {
        if (n == name) {
          raise_fault("TypeError", "got multiple values for keyword argument '" + name + "'");
        }
      }
      args.keywords.emplace_back(name, std::move(v));
    };
    if (kw.name.empty()) {
      Value m = eval(*kw.value);
      if (!m.is_dict()) {
        raise_fault("TypeError", "argument after ** must be a mapping, not " + m.type_name());
      }
      for (const auto& [k, v] : m.as_dict().entries()) {
        if (!k.is_str()) raise_fault("TypeError", "keywords must be strings");
        add(k.as_str(), v);
      }
    } else {
      add(kw.name, eval(*kw.value));
    }
  }
  return call(func, std::move(args));
}

Value Interpreter::eval_fstring(const ast::FString& node) {
  std::string out;
  for (const auto& part : node.parts) {
    if (!part.expr) {
      out += part.literal;
      continue;
    }
    Value v = eval(*part.expr);
    if (part.conversion == 'r' || part.conversion == 'a') v = Value::string(repr(v));
    if (part.conversion == 's') v = Value::string(str(v));
    std::string spec;
    if (part.format_spec) {
      spec = eval(*part.format_spec).as_str();
    }
    out += format_value(v, spec);
    check_string(out.size());
  }
  return Value::string(std::move(out));
}

Value Interpreter::eval_comprehension(const Expr& expr) {
  const std::vector<ast::Comprehension>* gens = nullptr;
  const auto* lc = std::get_if<ast::ListComp>(&expr.node);
  const auto* dc = std::get_if<ast::DictComp>(&expr.node);
  gens = lc ? &lc->generators : &dc->generators;

  // The outermost iterable is evaluated in the enclosing scope.
  Value first = eval(*(*gens)[0].iter);
  auto comp_frame = std::make_shared<Frame>();
  comp_frame->parent = frame_;
  FrameScope scope(frame_, comp_frame);

  std::vector<Value> list_out;
  std::shared_ptr<DictObject> dict_out = dc ? std::make_shared<DictObject>() : nullptr;

  std::function<void(std::size_t)> run = [&](std::size_t g) {
    if (g == gens->size()) {
      if (lc) {
        list_out.push_back(eval(*lc->elt));
        if ((list_out.size() & 0xFFFF) == 0) check_length(list_out.size());
      } else {
        Value k = eval(*dc->key);
        Value v = eval(*dc->value);
        dict_out->set(require_key(k), std::move(v));
      }
      return;
    }
    const auto& gen = (*gens)[g];
    Value iterable = g == 0 ? first : eval(*gen.iter);
    iterate(iterable, [&](const Value& v) {
      assign(*gen.target, v);
      for (const auto& cond : gen.ifs) {
        if (!truthy(eval(*cond))) return true;
      }
      run(g + 1);
      return true;
    });
  };
  run(0);
  if (lc) {
    check_length(list_out.size());
    return Value::list(std::move(list_out));
  }
  return Value::dict(std::move(dict_out));
}

// ---- sessions -------------------------------------------------------------

ScriptSession::ScriptSession(Bindings bindings) {
  state_.bindings = std::move(bindings);
  reset();
}

void ScriptSession::reset() {
  if (state_.globals) state_.globals->vars.clear();
  state_.globals = std::make_shared<Frame>();
  state_.globals->module_level = true;
  state_.seeded = false;
}

void ScriptSession::bind(std::string name, Value value) {
  state_.bindings[std::move(name)] = std::move(value);
}

std::optional<Value> ScriptSession::global(std::string_view name) const {
  auto it = state_.globals->vars.find(std::string(name));
  if (it == state_.globals->vars.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ScriptSession::global_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : state_.globals->vars) out.push_back(name);
  std::sort(out.begin(), out.end());
  return out;
}

ExecutionResult ScriptSession::run(const ScriptProgram& program, const InterpreterLimits& limits) {
  limits.validate();
  if (auto err = check_imports(program, limits)) {
    ExecutionResult r;
    r.error = std::move(err);
    return r;
  }
  return execute(program, limits);
}

ExecutionResult ScriptSession::run_source(std::string source, const InterpreterLimits& limits) {
  try {
    return run(parse(std::move(source)), limits);
  } catch (const ParseError& e) {
    ExecutionResult r;
    r.error = ExecutionError{ErrorKind::ParseError, e.message(), e.pos().line, e.pos().column};
    return r;
  }
}

ExecutionResult ScriptSession::execute(const ScriptProgram& program,
                                       const InterpreterLimits& limits) {
  limits.validate();
  if (!state_.seeded) {
    state_.rng.seed(limits.random_seed);
    state_.seeded = true;
  }
  ExecutionResult result;
  {
    Interpreter interp(state_, limits, program.module_ptr());
    auto fail = [&](ErrorKind kind, std::string message, int line) {
      result.error = ExecutionError{kind, std::move(message),
                                    line > 0 ? std::optional<int>(line) : std::nullopt,
                                    std::nullopt};
    };
    try {
      interp.run();
    } catch (FinalAnswerSignal& s) {
      result.final_answer = std::move(s.value);
    } catch (const ScriptFault& f) {
      std::string msg = f.type();
      if (!f.message().empty()) msg += ": " + f.message();
      fail(ErrorKind::RuntimeFault, msg, f.line() ? f.line() : interp.current_line());
    } catch (const OperationLimitError& e) {
      fail(ErrorKind::OperationLimitExceeded, e.what(), interp.current_line());
    } catch (const SandboxViolationError& e) {
      fail(ErrorKind::SandboxViolation, e.what(), interp.current_line());
    } catch (const WallClockExceeded&) {
      std::string cap = limits.wall_clock_cap ? float_repr(*limits.wall_clock_cap) : "?";
      fail(ErrorKind::RuntimeFault, "TimeoutError: execution exceeded the wall-clock cap of " +
                                        cap + " seconds",
           interp.current_line());
    } catch (const ImportGateError& g) {
      fail(g.kind, g.message, interp.current_line());
    } catch (const std::bad_alloc&) {
      fail(ErrorKind::RuntimeFault, "MemoryError: out of memory", interp.current_line());
    } catch (const std::exception& e) {
      fail(ErrorKind::RuntimeFault, std::string("RuntimeError: ") + e.what(), interp.current_line());
    }
    result.stdout_text = interp.stdout_text();
    result.operations_used = std::min<std::uint64_t>(interp.operations(), limits.max_operations);
    result.files_written = interp.sandbox().files_written();
  }
  return result;
}

ExecutionResult execute(const ScriptProgram& program, const InterpreterLimits& limits,
                        const Bindings& bindings) {
  ScriptSession session(bindings);
  return session.execute(program, limits);
}

}  // namespace pathagent::script
