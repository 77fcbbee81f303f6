#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace pathagent::script {

/// Byte range [begin, end) into the program source plus the 1-based
/// position of `begin`.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 0;
  int column = 0;
};

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

enum class BinaryOp { Add, Sub, Mul, Div, FloorDiv, Mod, Pow, BitAnd, BitOr, BitXor, LShift, RShift };
enum class UnaryOp { Neg, Pos, Not, Invert };
enum class CompareOp { Eq, NotEq, Lt, LtE, Gt, GtE, In, NotIn, Is, IsNot };
enum class BoolOpKind { And, Or };

const char* to_string(BinaryOp op);
const char* to_string(CompareOp op);

namespace ast {

struct Param {
  std::string name;
  ExprPtr default_value;  // may be null
};

struct Parameters {
  std::vector<Param> params;
  std::string vararg;  // "*args" name, empty if absent
  std::string kwarg;   // "**kwargs" name, empty if absent
};

struct Name {
  std::string id;
};

struct Constant {
  std::variant<std::monostate, bool, std::int64_t, double, std::string> value;
};

struct FStringPart {
  std::string literal;   // used when expr is null
  ExprPtr expr;          // replacement field
  char conversion = 0;   // 'r', 's', 'a' or 0
  ExprPtr format_spec;   // an FString node, may be null
};

struct FString {
  std::vector<FStringPart> parts;
};

struct ListDisplay {
  std::vector<ExprPtr> elts;
};

struct TupleDisplay {
  std::vector<ExprPtr> elts;
};

struct DictDisplay {
  // key == nullptr marks a "**mapping" unpacking entry
  std::vector<std::pair<ExprPtr, ExprPtr>> items;
};

struct Binary {
  BinaryOp op;
  ExprPtr left;
  ExprPtr right;
};

struct Unary {
  UnaryOp op;
  ExprPtr operand;
};

struct BoolOp {
  BoolOpKind op;
  std::vector<ExprPtr> values;
};

struct Compare {
  ExprPtr left;
  std::vector<CompareOp> ops;
  std::vector<ExprPtr> comparators;
};

struct IfExp {
  ExprPtr test;
  ExprPtr body;
  ExprPtr orelse;
};

struct Keyword {
  std::string name;  // empty for "**mapping"
  ExprPtr value;
};

struct Call {
  ExprPtr func;
  std::vector<ExprPtr> args;  // may contain Starred
  std::vector<Keyword> keywords;
};

struct Starred {
  ExprPtr value;
};

struct Attribute {
  ExprPtr value;
  std::string attr;
};

struct Subscript {
  ExprPtr value;
  ExprPtr index;
};

struct Slice {
  ExprPtr lower;
  ExprPtr upper;
  ExprPtr step;
};

struct Comprehension {
  ExprPtr target;
  ExprPtr iter;
  std::vector<ExprPtr> ifs;
};

/// List comprehensions and parenthesized generator expressions; the latter
/// are evaluated eagerly into a list.
struct ListComp {
  ExprPtr elt;
  std::vector<Comprehension> generators;
  bool generator = false;
};

struct DictComp {
  ExprPtr key;
  ExprPtr value;
  std::vector<Comprehension> generators;
};

struct Lambda {
  std::shared_ptr<Parameters> params;
  ExprPtr body;
};

}  // namespace ast

struct Expr {
  using Node = std::variant<ast::Name, ast::Constant, ast::FString, ast::ListDisplay,
                            ast::TupleDisplay, ast::DictDisplay, ast::Binary, ast::Unary,
                            ast::BoolOp, ast::Compare, ast::IfExp, ast::Call, ast::Starred,
                            ast::Attribute, ast::Subscript, ast::Slice, ast::ListComp,
                            ast::DictComp, ast::Lambda>;
  Span span;
  Node node;
};

namespace ast {

struct ExprStmt {
  ExprPtr value;
};

struct Assign {
  std::vector<ExprPtr> targets;  // a = b = value has two targets
  ExprPtr value;
};

/// "x: int = 3"; the annotation is parsed and ignored.
struct AnnAssign {
  ExprPtr target;
  ExprPtr annotation;
  ExprPtr value;  // may be null
};

struct AugAssign {
  ExprPtr target;
  BinaryOp op;
  ExprPtr value;
};

struct If {
  ExprPtr test;
  Block body;
  Block orelse;  // "elif" chains nest as a single If in orelse
};

struct For {
  ExprPtr target;
  ExprPtr iter;
  Block body;
};

struct While {
  ExprPtr test;
  Block body;
};

struct FunctionDef {
  std::string name;
  std::shared_ptr<Parameters> params;
  Block body;
};

struct Return {
  ExprPtr value;  // may be null
};

struct Break {};
struct Continue {};
struct Pass {};

struct Alias {
  std::string name;    // dotted module name or imported member
  std::string asname;  // empty when absent
};

struct Import {
  std::vector<Alias> names;
};

struct ImportFrom {
  std::string module;
  std::vector<Alias> names;
};

/// The single supported exception-handling form:
///   try: ... except [Type [as name]]: ...
struct Try {
  Block body;
  ExprPtr handler_type;  // may be null (bare except)
  std::string handler_name;
  Block handler;
};

struct Delete {
  std::vector<ExprPtr> targets;
};

struct Assert {
  ExprPtr test;
  ExprPtr msg;  // may be null
};

struct Global {
  std::vector<std::string> names;
};

}  // namespace ast

struct Stmt {
  using Node = std::variant<ast::ExprStmt, ast::Assign, ast::AnnAssign, ast::AugAssign,
                            ast::If, ast::For, ast::While, ast::FunctionDef, ast::Return,
                            ast::Break, ast::Continue, ast::Pass, ast::Import,
                            ast::ImportFrom, ast::Try, ast::Delete, ast::Assert, ast::Global>;
  Span span;
  Node node;
};

struct Module {
  std::string source;
  Block body;
};

/// S-expression rendering of a tree, used by tests and debugging.
std::string dump(const Expr& e);
std::string dump(const Stmt& s);
std::string dump(const Module& m);

/// Total number of statement and expression nodes in the module.
std::size_t count_nodes(const Module& m);

}  // namespace pathagent::script
