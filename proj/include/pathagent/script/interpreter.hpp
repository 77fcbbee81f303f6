#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathagent/script/modules.hpp"
#include "pathagent/script/parser.hpp"
#include "pathagent/script/sandbox.hpp"
#include "pathagent/script/value.hpp"

namespace pathagent::script {

class UserFunction;
struct ItemKey;

struct InterpreterLimits {
  std::uint64_t max_operations = 10'000'000;
  std::set<std::string> allowed_imports{"json", "math", "pathlib", "random", "statistics"};
  std::set<std::string> forbidden_imports{"os"};
  std::filesystem::path working_dir;
  /// Extra directories that open() and pathlib may read from.
  std::vector<std::filesystem::path> read_only_roots;
  std::optional<double> wall_clock_cap;  // seconds
  std::uint64_t random_seed = 42;
  std::size_t max_call_depth = 200;
  std::size_t max_sequence_length = 5'000'000;
  std::size_t max_string_bytes = std::size_t{64} << 20;
  std::size_t max_stdout_bytes = std::size_t{4} << 20;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

enum class ErrorKind {
  ParseError,
  ForbiddenImport,
  UnknownImport,
  OperationLimitExceeded,
  RuntimeFault,
  SandboxViolation,
};

const char* to_string(ErrorKind kind);

struct ExecutionError {
  ErrorKind kind = ErrorKind::RuntimeFault;
  std::string message;
  std::optional<int> line;
  std::optional<int> column;

  /// Single-line rendering fed back to the model, e.g.
  /// "RuntimeFault at line 3: ZeroDivisionError: division by zero".
  std::string render() const;
};

struct ExecutionResult {
  std::string stdout_text;
  std::optional<Value> final_answer;
  std::optional<ExecutionError> error;
  std::uint64_t operations_used = 0;
  std::vector<std::string> files_written;

  bool ok() const { return !error.has_value(); }
};

using Bindings = std::map<std::string, Value, std::less<>>;

/// Static import gate; inspects every import statement before anything runs.
std::optional<ExecutionError> check_imports(const ScriptProgram& program,
                                            const InterpreterLimits& limits);

/// A variable scope. Function calls and comprehensions get their own frame;
/// the module frame holds the globals.
struct Frame {
  std::unordered_map<std::string, Value> vars;
  std::shared_ptr<Frame> parent;
  std::set<std::string, std::less<>> global_names;
  bool module_level = false;
};

/// State that persists across executions within one session.
struct SessionState {
  std::shared_ptr<Frame> globals;
  Bindings bindings;
  RandomState rng;
  bool seeded = false;
};

/// One execution of one program. Host callables receive this to print,
/// call back into script functions, or touch the sandboxed filesystem.
class Interpreter {
 public:
  Interpreter(SessionState& session, const InterpreterLimits& limits,
              std::shared_ptr<const Module> module);
  ~Interpreter();

  /// Runs the module body. Throws ScriptFault, FinalAnswerSignal,
  /// OperationLimitError or SandboxViolationError.
  void run();

  void write_stdout(std::string_view text);
  const std::string& stdout_text() const { return stdout_; }

  Value call(const Value& callee, CallArgs args);
  Value get_attribute(const Value& obj, std::string_view name);

  /// Visits the elements of an iterable; the visitor returns false to stop.
  void iterate(const Value& iterable, const std::function<bool(const Value&)>& visit);
  std::vector<Value> to_vector(const Value& iterable);

  Sandbox& sandbox() { return sandbox_; }
  RandomState& random() { return session_.rng; }
  const InterpreterLimits& limits() const { return limits_; }

  void check_length(std::size_t n) const;
  void check_string(std::size_t bytes) const;

  void tick();
  std::uint64_t operations() const { return ops_; }
  int current_line() const { return line_; }

  /// Registers a file handle so it is flushed when execution ends.
  void track_handle(std::shared_ptr<HostObject> handle);

 private:
  friend class UserFunction;
  enum class Flow { Normal, Break, Continue, Return };

  Flow exec_block(const Block& block);
  Flow exec(const Stmt& stmt);
  Flow exec_for(const ast::For& node);
  Flow exec_try(const ast::Try& node);
  void exec_import(const Stmt& stmt);
  void check_module_allowed(const std::string& name) const;

  Value eval(const Expr& expr);
  Value eval_call(const ast::Call& node);
  Value eval_fstring(const ast::FString& node);
  Value eval_comprehension(const Expr& expr);
  ItemKey eval_key(const Expr& index);
  std::vector<Value> eval_elements(const std::vector<ExprPtr>& elts);
  Value make_function(const std::string& name, std::shared_ptr<const ast::Parameters> params,
                      const Block* body, const Expr* expr);

  void assign(const Expr& target, const Value& value);
  void exec_augassign(const ast::AugAssign& node);
  void delete_target(const Expr& target);

  Value lookup(const std::string& name);
  void store(const std::string& name, Value value);

  Value call_user(UserFunction& fn, CallArgs& args);

  SessionState& session_;
  const InterpreterLimits& limits_;
  std::shared_ptr<const Module> module_;
  Sandbox sandbox_;
  std::shared_ptr<Frame> frame_;
  std::string stdout_;
  bool stdout_truncated_ = false;
  std::uint64_t ops_ = 0;
  int line_ = 0;
  std::size_t depth_ = 0;
  Value return_value_;
  std::chrono::steady_clock::time_point started_;
  std::vector<std::shared_ptr<HostObject>> handles_;
};

/// Interpreter state that survives across programs: globals, functions and
/// the random generator. Used by the agent so that later steps can refer to
/// variables defined by earlier ones.
class ScriptSession {
 public:
  explicit ScriptSession(Bindings bindings = {});

  /// Import gate followed by execution.
  ExecutionResult run(const ScriptProgram& program, const InterpreterLimits& limits);
  /// Parse, import gate and execution.
  ExecutionResult run_source(std::string source, const InterpreterLimits& limits);
  /// Execution only; the caller is responsible for the import gate.
  ExecutionResult execute(const ScriptProgram& program, const InterpreterLimits& limits);

  /// Drops all globals and reseeds the random generator on next use.
  void reset();

  void bind(std::string name, Value value);
  std::optional<Value> global(std::string_view name) const;
  /// Names defined by scripts so far, sorted. Bindings are not included.
  std::vector<std::string> global_names() const;

 private:
  SessionState state_;
};

/// Executes in a fresh session.
ExecutionResult execute(const ScriptProgram& program, const InterpreterLimits& limits,
                        const Bindings& bindings = {});

/// Wall-clock cap exceeded; reported as a RuntimeFault (TimeoutError).
class WallClockExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathagent::script
