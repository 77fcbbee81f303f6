#pragma once

#include <stdexcept>
#include <string>

#include "pathagent/script/value.hpp"

namespace pathagent::script {

/// 1-based source position.
struct SourcePos {
  int line = 0;
  int column = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, SourcePos pos)
      : std::runtime_error(message), message_(std::move(message)), pos_(pos) {}
  const std::string& message() const { return message_; }
  SourcePos pos() const { return pos_; }

 private:
  std::string message_;
  SourcePos pos_;
};

/// A runtime fault raised inside interpreted code. `type` is a Python-style
/// exception name ("ZeroDivisionError", "KeyError", ...) so that scripts can
/// catch it with try/except and the model sees familiar names.
class ScriptFault : public std::runtime_error {
 public:
  ScriptFault(std::string type, std::string message, int line = 0)
      : std::runtime_error(type + ": " + message),
        type_(std::move(type)),
        message_(std::move(message)),
        line_(line) {}
  const std::string& type() const { return type_; }
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  void set_line(int line) { line_ = line; }

 private:
  std::string type_;
  std::string message_;
  int line_;
};

/// Filesystem access outside the permitted roots. Never catchable by scripts.
class SandboxViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation budget exhausted. Never catchable by scripts.
class OperationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by final_answer() to unwind evaluation.
struct FinalAnswerSignal {
  Value value;
};

}  // namespace pathagent::script
