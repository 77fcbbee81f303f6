#include "pathagent/script/parser.hpp"

#include <set>
#include <string_view>

#include "pathagent/script/lexer.hpp"

namespace pathagent::script {

namespace {

const std::set<std::string_view>& keywords() {
  static const std::set<std::string_view> k = {
      "False", "None",   "True",     "and",    "as",     "assert", "async",  "await",
      "break", "class",  "continue", "def",    "del",    "elif",   "else",   "except",
      "finally", "for",  "from",     "global", "if",     "import", "in",     "is",
      "lambda", "nonlocal", "not",   "or",     "pass",   "raise",  "return", "try",
      "while", "with",   "yield"};
  return k;
}

bool is_keyword(std::string_view s) { return keywords().count(s) != 0; }

constexpr int kMaxNesting = 100;

std::optional<BinaryOp> augassign_op(const Token& t) {
  if (t.kind != TokenKind::Op) return std::nullopt;
  static const std::pair<std::string_view, BinaryOp> table[] = {
      {"+=", BinaryOp::Add},     {"-=", BinaryOp::Sub},      {"*=", BinaryOp::Mul},
      {"/=", BinaryOp::Div},     {"//=", BinaryOp::FloorDiv}, {"%=", BinaryOp::Mod},
      {"**=", BinaryOp::Pow},    {"&=", BinaryOp::BitAnd},   {"|=", BinaryOp::BitOr},
      {"^=", BinaryOp::BitXor},  {"<<=", BinaryOp::LShift},  {">>=", BinaryOp::RShift}};
  for (const auto& [text, op] : table) {
    if (t.text == text) return op;
  }
  return std::nullopt;
}

class Parser {
 public:
  Parser(const std::string& src, const LineIndex& lines, std::vector<Token> tokens, int nesting)
      : src_(src), lines_(lines), toks_(std::move(tokens)), nesting_(nesting) {}

  Block parse_module() {
    Block body;
    while (peek().kind != TokenKind::End) {
      if (peek().kind == TokenKind::Newline) {
        advance();
        continue;
      }
      parse_statement(body);
    }
    return body;
  }

  ExprPtr parse_field_expression() {
    if (peek().kind == TokenKind::End) fail("f-string: empty expression not allowed", peek());
    auto e = parse_star_expressions();
    if (peek().kind != TokenKind::End) fail("f-string: invalid syntax", peek());
    return e;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    std::size_t idx = std::min(i_ + k, toks_.size() - 1);
    return toks_[idx];
  }

  const Token& advance() {
    const Token& t = toks_[i_];
    if (t.kind != TokenKind::Newline && t.kind != TokenKind::Indent &&
        t.kind != TokenKind::Dedent && t.kind != TokenKind::End) {
      prev_end_ = t.end;
    }
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }

  bool at_op(std::string_view op) const { return peek().is_op(op); }
  bool at_kw(std::string_view kw) const { return peek().is_name(kw); }

  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    advance();
    return true;
  }

  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    if (t.kind == TokenKind::End && msg == "invalid syntax") {
      throw ParseError("unexpected EOF while parsing", lines_.position(t.begin));
    }
    throw ParseError(msg, {t.line, t.column});
  }

  [[noreturn]] void fail_at(const std::string& msg, const Span& s) const {
    throw ParseError(msg, {s.line, s.column});
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) {
      const Token& t = peek();
      if (t.kind == TokenKind::End) fail("unexpected EOF while parsing", t);
      fail("expected '" + std::string(op) + "'", t);
    }
  }

  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'", peek());
  }

  std::string expect_identifier() {
    const Token& t = peek();
    if (t.kind != TokenKind::Name || is_keyword(t.text)) fail("invalid syntax", t);
    advance();
    return t.text;
  }

  struct NestGuard {
    Parser& p;
    NestGuard(Parser& parser, const Token& t) : p(parser) {
      if (++p.nesting_ > kMaxNesting) p.fail("too many nested blocks or expressions", t);
    }
    ~NestGuard() { --p.nesting_; }
  };

  Span span_from(const Token& first) const {
    return Span{first.begin, prev_end_, first.line, first.column};
  }

  Span span_from(const Span& first) const {
    return Span{first.begin, prev_end_, first.line, first.column};
  }

  template <typename Node>
  ExprPtr make_expr(const Span& s, Node node) {
    auto e = std::make_unique<Expr>();
    e->span = s;
    e->node = std::move(node);
    return e;
  }

  template <typename Node>
  StmtPtr make_stmt(const Span& s, Node node) {
    auto st = std::make_unique<Stmt>();
    st->span = s;
    st->node = std::move(node);
    return st;
  }

  // ---- statements ----------------------------------------------------------

  void parse_statement(Block& out) {
    const Token& t = peek();
    NestGuard guard(*this, t);
    if (t.kind == TokenKind::Indent) fail("unexpected indent", t);
    if (t.kind == TokenKind::Dedent) fail("unexpected unindent", t);
    if (t.is_op("@")) fail("decorators are not supported", t);
    if (t.kind == TokenKind::Name) {
      const std::string& w = t.text;
      if (w == "if") return out.push_back(parse_if());
      if (w == "for") return out.push_back(parse_for());
      if (w == "while") return out.push_back(parse_while());
      if (w == "def") return out.push_back(parse_def());
      if (w == "try") return out.push_back(parse_try());
      if (w == "class") fail("class definitions are not supported", t);
      if (w == "with") fail("with statements are not supported", t);
      if (w == "async" || w == "await") fail("async constructs are not supported", t);
      if (w == "elif" || w == "else" || w == "except" || w == "finally") {
        fail("invalid syntax", t);
      }
    }
    parse_simple_line(out);
  }

  void parse_simple_line(Block& out) {
    while (true) {
      out.push_back(parse_small_statement());
      if (accept_op(";")) {
        if (peek().kind == TokenKind::Newline || peek().kind == TokenKind::End) break;
        continue;
      }
      break;
    }
    if (peek().kind == TokenKind::Newline) {
      advance();
    } else if (peek().kind != TokenKind::End) {
      fail("invalid syntax", peek());
    }
  }

  StmtPtr parse_small_statement() {
    const Token& t = peek();
    if (t.kind == TokenKind::Name) {
      const std::string& w = t.text;
      if (w == "pass") {
        advance();
        return make_stmt(span_from(t), ast::Pass{});
      }
      if (w == "break" || w == "continue") {
        if (loop_depth_ == 0) fail("'" + w + "' outside loop", t);
        advance();
        if (w == "break") return make_stmt(span_from(t), ast::Break{});
        return make_stmt(span_from(t), ast::Continue{});
      }
      if (w == "return") {
        if (func_depth_ == 0) fail("'return' outside function", t);
        advance();
        ast::Return r;
        if (!at_statement_end()) r.value = parse_star_expressions();
        return make_stmt(span_from(t), std::move(r));
      }
      if (w == "import" || w == "from") return parse_import();
      if (w == "global") {
        advance();
        ast::Global g;
        do {
          g.names.push_back(expect_identifier());
        } while (accept_op(","));
        return make_stmt(span_from(t), std::move(g));
      }
      if (w == "del") {
        advance();
        ast::Delete d;
        do {
          if (at_statement_end()) break;
          auto target = parse_bitor();
          check_target(*target, "delete");
          d.targets.push_back(std::move(target));
        } while (accept_op(","));
        if (d.targets.empty()) fail("invalid syntax", peek());
        return make_stmt(span_from(t), std::move(d));
      }
      if (w == "assert") {
        advance();
        ast::Assert a;
        a.test = parse_test();
        if (accept_op(",")) a.msg = parse_test();
        return make_stmt(span_from(t), std::move(a));
      }
      if (w == "raise") fail("raise statements are not supported", t);
      if (w == "yield") fail("generators are not supported", t);
      if (w == "nonlocal") fail("nonlocal statements are not supported", t);
    }
    return parse_expression_statement();
  }

  bool at_statement_end() const {
    const Token& t = peek();
    return t.kind == TokenKind::Newline || t.kind == TokenKind::End || t.is_op(";");
  }

  StmtPtr parse_expression_statement() {
    const Token& first = peek();
    auto lhs = parse_star_expressions();

    if (at_op(":")) {
      advance();
      check_single_target(*lhs, "annotated assignment");
      ast::AnnAssign a;
      a.annotation = parse_test();
      if (accept_op("=")) a.value = parse_star_expressions();
      a.target = std::move(lhs);
      return make_stmt(span_from(first), std::move(a));
    }

    if (auto op = augassign_op(peek())) {
      advance();
      check_single_target(*lhs, "augmented assignment");
      ast::AugAssign a;
      a.op = *op;
      a.value = parse_star_expressions();
      a.target = std::move(lhs);
      return make_stmt(span_from(first), std::move(a));
    }

    if (at_op("=")) {
      ast::Assign a;
      check_target(*lhs, "assign to");
      a.targets.push_back(std::move(lhs));
      while (accept_op("=")) {
        auto rhs = parse_star_expressions();
        if (at_op("=")) {
          check_target(*rhs, "assign to");
          a.targets.push_back(std::move(rhs));
        } else {
          a.value = std::move(rhs);
        }
      }
      if (!a.value) fail("invalid syntax", peek());
      reject_bare_starred(*a.value);
      return make_stmt(span_from(first), std::move(a));
    }

    if (at_op(":=")) fail("assignment expressions are not supported", peek());
    reject_bare_starred(*lhs);
    return make_stmt(span_from(first), ast::ExprStmt{std::move(lhs)});
  }

  void reject_bare_starred(const Expr& e) {
    if (std::holds_alternative<ast::Starred>(e.node)) {
      fail_at("can't use starred expression here", e.span);
    }
  }

  void check_single_target(const Expr& e, const std::string& what) {
    if (std::holds_alternative<ast::Name>(e.node) ||
        std::holds_alternative<ast::Attribute>(e.node) ||
        std::holds_alternative<ast::Subscript>(e.node)) {
      return;
    }
    fail_at("illegal target for " + what, e.span);
  }

  void check_target(const Expr& e, const std::string& verb) {
    if (std::holds_alternative<ast::Name>(e.node) ||
        std::holds_alternative<ast::Attribute>(e.node) ||
        std::holds_alternative<ast::Subscript>(e.node)) {
      return;
    }
    const std::vector<ExprPtr>* elts = nullptr;
    if (const auto* t = std::get_if<ast::TupleDisplay>(&e.node)) elts = &t->elts;
    if (const auto* l = std::get_if<ast::ListDisplay>(&e.node)) elts = &l->elts;
    if (elts != nullptr) {
      int starred = 0;
      for (const auto& sub : *elts) {
        if (const auto* s = std::get_if<ast::Starred>(&sub->node)) {
          if (verb == "delete") fail_at("cannot delete starred", sub->span);
          if (++starred > 1) fail_at("multiple starred expressions in assignment", sub->span);
          check_target(*s->value, verb);
        } else {
          check_target(*sub, verb);
        }
      }
      return;
    }
    std::string what = "expression";
    if (std::holds_alternative<ast::Call>(e.node)) what = "function call";
    if (std::holds_alternative<ast::Constant>(e.node)) what = "literal";
    fail_at("cannot " + verb + " " + what, e.span);
  }

  Block parse_suite() {
    expect_op(":");
    Block body;
    if (peek().kind == TokenKind::Newline) {
      advance();
      if (peek().kind != TokenKind::Indent) fail("expected an indented block", peek());
      advance();
      while (peek().kind != TokenKind::Dedent && peek().kind != TokenKind::End) {
        parse_statement(body);
      }
      if (peek().kind == TokenKind::Dedent) advance();
    } else {
      parse_simple_line(body);
    }
    return body;
  }

  StmtPtr parse_if() {
    const Token& first = advance();  // 'if' or 'elif'
    ast::If node;
    node.test = parse_named_test();
    node.body = parse_suite();
    if (at_kw("elif")) {
      node.orelse.push_back(parse_if());
    } else if (accept_kw("else")) {
      node.orelse = parse_suite();
    }
    return make_stmt(span_from(first), std::move(node));
  }

  StmtPtr parse_for() {
    const Token& first = advance();
    ast::For node;
    node.target = parse_target_list();
    check_target(*node.target, "assign to");
    expect_kw("in");
    node.iter = parse_star_expressions();
    ++loop_depth_;
    node.body = parse_suite();
    --loop_depth_;
    if (at_kw("else")) fail("for-else is not supported", peek());
    return make_stmt(span_from(first), std::move(node));
  }

  StmtPtr parse_while() {
    const Token& first = advance();
    ast::While node;
    node.test = parse_named_test();
    ++loop_depth_;
    node.body = parse_suite();
    --loop_depth_;
    if (at_kw("else")) fail("while-else is not supported", peek());
    return make_stmt(span_from(first), std::move(node));
  }

  StmtPtr parse_def() {
    const Token& first = advance();
    ast::FunctionDef node;
    node.name = expect_identifier();
    expect_op("(");
    node.params = parse_parameters(")", true);
    expect_op(")");
    if (accept_op("->")) parse_test();
    int saved_loops = loop_depth_;
    loop_depth_ = 0;
    ++func_depth_;
    node.body = parse_suite();
    --func_depth_;
    loop_depth_ = saved_loops;
    return make_stmt(span_from(first), std::move(node));
  }

  std::shared_ptr<ast::Parameters> parse_parameters(std::string_view close, bool annotations) {
    auto params = std::make_shared<ast::Parameters>();
    std::set<std::string> seen;
    bool saw_default = false;
    auto note = [&](const std::string& name, const Token& t) {
      if (!seen.insert(name).second) fail("duplicate argument '" + name + "' in function definition", t);
    };
    while (!at_op(close)) {
      const Token& t = peek();
      if (accept_op("**")) {
        const Token& nt = peek();
        params->kwarg = expect_identifier();
        note(params->kwarg, nt);
        if (annotations && accept_op(":")) parse_test();
        accept_op(",");
        if (!at_op(close)) fail("arguments cannot follow var-keyword argument", peek());
        break;
      }
      if (accept_op("*")) {
        if (at_op(",") || at_op(close)) fail("keyword-only parameters are not supported", t);
        if (!params->vararg.empty()) fail("invalid syntax", t);
        const Token& nt = peek();
        params->vararg = expect_identifier();
        note(params->vararg, nt);
        if (annotations && accept_op(":")) parse_test();
      } else if (at_op("/")) {
        fail("positional-only parameters are not supported", t);
      } else {
        if (!params->vararg.empty()) fail("keyword-only parameters are not supported", t);
        ast::Param p;
        p.name = expect_identifier();
        note(p.name, t);
        if (annotations && accept_op(":")) parse_test();
        if (accept_op("=")) {
          p.default_value = parse_test();
          saw_default = true;
        } else if (saw_default) {
          fail("non-default argument follows default argument", t);
        }
        params->params.push_back(std::move(p));
      }
      if (!accept_op(",")) break;
    }
    return params;
  }

  StmtPtr parse_try() {
    const Token& first = advance();
    ast::Try node;
    node.body = parse_suite();
    if (at_kw("finally")) fail("finally clauses are not supported", peek());
    if (!at_kw("except")) fail("expected 'except'", peek());
    advance();
    if (!at_op(":")) {
      node.handler_type = parse_test();
      if (accept_kw("as")) node.handler_name = expect_identifier();
    }
    node.handler = parse_suite();
    if (at_kw("except")) fail("only a single except clause is supported", peek());
    if (at_kw("else")) fail("try-else is not supported", peek());
    if (at_kw("finally")) fail("finally clauses are not supported", peek());
    return make_stmt(span_from(first), std::move(node));
  }

  std::string parse_dotted_name() {
    std::string name = expect_identifier();
    while (accept_op(".")) name += "." + expect_identifier();
    return name;
  }

  StmtPtr parse_import() {
    const Token& first = peek();
    if (func_depth_ > 0) fail("imports inside functions are not supported", first);
    advance();
    if (first.text == "import") {
      ast::Import node;
      do {
        ast::Alias a;
        a.name = parse_dotted_name();
        if (accept_kw("as")) a.asname = expect_identifier();
        node.names.push_back(std::move(a));
      } while (accept_op(","));
      return make_stmt(span_from(first), std::move(node));
    }
    ast::ImportFrom node;
    if (at_op(".") || at_op("...")) fail("relative imports are not supported", peek());
    node.module = parse_dotted_name();
    expect_kw("import");
    if (at_op("*")) fail("wildcard imports are not supported", peek());
    bool paren = accept_op("(");
    do {
      if (paren && at_op(")")) break;
      ast::Alias a;
      a.name = expect_identifier();
      if (accept_kw("as")) a.asname = expect_identifier();
      node.names.push_back(std::move(a));
    } while (accept_op(","));
    if (paren) expect_op(")");
    if (node.names.empty()) fail("invalid syntax", peek());
    return make_stmt(span_from(first), std::move(node));
  }

  // ---- expressions ---------------------------------------------------------

  bool can_start_expression(const Token& t) const {
    switch (t.kind) {
      case TokenKind::Int:
      case TokenKind::Float:
      case TokenKind::String: return true;
      case TokenKind::Name:
        return !is_keyword(t.text) || t.text == "None" || t.text == "True" ||
               t.text == "False" || t.text == "not" || t.text == "lambda";
      case TokenKind::Op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "*";
      default: return false;
    }
  }

  ExprPtr parse_star_or_test() {
    if (at_op("*")) {
      const Token& first = advance();
      auto v = parse_bitor();
      return make_expr(span_from(first), ast::Starred{std::move(v)});
    }
    return parse_test();
  }

  // testlist_star_expr: a bare comma-separated sequence becomes a tuple.
  ExprPtr parse_star_expressions() {
    const Token& first = peek();
    auto e = parse_star_or_test();
    if (!at_op(",")) return e;
    ast::TupleDisplay tup;
    tup.elts.push_back(std::move(e));
    while (accept_op(",")) {
      if (!can_start_expression(peek())) break;
      tup.elts.push_back(parse_star_or_test());
    }
    return make_expr(span_from(first), std::move(tup));
  }

  ExprPtr parse_target_list() {
    const Token& first = peek();
    auto one = [&]() -> ExprPtr {
      if (at_op("*")) {
        const Token& s = advance();
        auto v = parse_bitor();
        return make_expr(span_from(s), ast::Starred{std::move(v)});
      }
      return parse_bitor();
    };
    auto e = one();
    if (!at_op(",")) return e;
    ast::TupleDisplay tup;
    tup.elts.push_back(std::move(e));
    while (accept_op(",")) {
      if (at_kw("in") || !can_start_expression(peek())) break;
      tup.elts.push_back(one());
    }
    return make_expr(span_from(first), std::move(tup));
  }

  ExprPtr parse_named_test() {
    auto e = parse_test();
    if (at_op(":=")) fail("assignment expressions are not supported", peek());
    return e;
  }

  ExprPtr parse_test() {
    const Token& first = peek();
    NestGuard guard(*this, first);
    if (at_kw("lambda")) return parse_lambda();
    auto body = parse_or_test();
    if (at_kw("if")) {
      advance();
      ast::IfExp node;
      node.test = parse_or_test();
      expect_kw("else");
      node.orelse = parse_test();
      node.body = std::move(body);
      return make_expr(span_from(first), std::move(node));
    }
    return body;
  }

  ExprPtr parse_lambda() {
    const Token& first = advance();
    ast::Lambda node;
    node.params = parse_parameters(":", false);
    expect_op(":");
    node.body = parse_test();
    return make_expr(span_from(first), std::move(node));
  }

  ExprPtr parse_or_test() {
    const Token& first = peek();
    auto e = parse_and_test();
    if (!at_kw("or")) return e;
    ast::BoolOp node{BoolOpKind::Or, {}};
    node.values.push_back(std::move(e));
    while (accept_kw("or")) node.values.push_back(parse_and_test());
    return make_expr(span_from(first), std::move(node));
  }

  ExprPtr parse_and_test() {
    const Token& first = peek();
    auto e = parse_not_test();
    if (!at_kw("and")) return e;
    ast::BoolOp node{BoolOpKind::And, {}};
    node.values.push_back(std::move(e));
    while (accept_kw("and")) node.values.push_back(parse_not_test());
    return make_expr(span_from(first), std::move(node));
  }

  ExprPtr parse_not_test() {
    const Token& first = peek();
    if (accept_kw("not")) {
      NestGuard guard(*this, first);
      auto operand = parse_not_test();
      return make_expr(span_from(first), ast::Unary{UnaryOp::Not, std::move(operand)});
    }
    return parse_comparison();
  }

  std::optional<CompareOp> comparison_op() {
    const Token& t = peek();
    if (t.kind == TokenKind::Op) {
      static const std::pair<std::string_view, CompareOp> table[] = {
          {"==", CompareOp::Eq}, {"!=", CompareOp::NotEq}, {"<", CompareOp::Lt},
          {"<=", CompareOp::LtE}, {">", CompareOp::Gt},    {">=", CompareOp::GtE}};
      for (const auto& [text, op] : table) {
        if (t.text == text) {
          advance();
          return op;
        }
      }
      return std::nullopt;
    }
    if (t.is_name("in")) {
      advance();
      return CompareOp::In;
    }
    if (t.is_name("not") && peek(1).is_name("in")) {
      advance();
      advance();
      return CompareOp::NotIn;
    }
    if (t.is_name("is")) {
      advance();
      if (accept_kw("not")) return CompareOp::IsNot;
      return CompareOp::Is;
    }
    return std::nullopt;
  }

  ExprPtr parse_comparison() {
    const Token& first = peek();
    auto left = parse_bitor();
    auto op = comparison_op();
    if (!op) return left;
    ast::Compare node;
    node.left = std::move(left);
    while (op) {
      node.ops.push_back(*op);
      node.comparators.push_back(parse_bitor());
      op = comparison_op();
    }
    return make_expr(span_from(first), std::move(node));
  }

  template <typename Next>
  ExprPtr parse_binary_level(Next next,
                             std::initializer_list<std::pair<std::string_view, BinaryOp>> ops) {
    const Token& first = peek();
    auto left = (this->*next)();
    while (true) {
      const Token& t = peek();
      if (t.kind != TokenKind::Op) break;
      std::optional<BinaryOp> found;
      for (const auto& [text, op] : ops) {
        if (t.text == text) found = op;
      }
      if (!found) break;
      advance();
      auto right = (this->*next)();
      left = make_expr(span_from(first), ast::Binary{*found, std::move(left), std::move(right)});
    }
    return left;
  }

  ExprPtr parse_bitor() {
    return parse_binary_level(&Parser::parse_bitxor, {{"|", BinaryOp::BitOr}});
  }
  ExprPtr parse_bitxor() {
    return parse_binary_level(&Parser::parse_bitand, {{"^", BinaryOp::BitXor}});
  }
  ExprPtr parse_bitand() {
    return parse_binary_level(&Parser::parse_shift, {{"&", BinaryOp::BitAnd}});
  }
  ExprPtr parse_shift() {
    return parse_binary_level(&Parser::parse_arith,
                              {{"<<", BinaryOp::LShift}, {">>", BinaryOp::RShift}});
  }
  ExprPtr parse_arith() {
    return parse_binary_level(&Parser::parse_term, {{"+", BinaryOp::Add}, {"-", BinaryOp::Sub}});
  }
  ExprPtr parse_term() {
    if (at_op("@")) fail("invalid syntax", peek());
    auto e = parse_binary_level(&Parser::parse_factor, {{"*", BinaryOp::Mul},
                                                         {"/", BinaryOp::Div},
                                                         {"//", BinaryOp::FloorDiv},
                                                         {"%", BinaryOp::Mod}});
    if (at_op("@")) fail("matrix multiplication is not supported", peek());
    return e;
  }

  ExprPtr parse_factor() {
    const Token& first = peek();
    std::optional<UnaryOp> op;
    if (first.is_op("-")) op = UnaryOp::Neg;
    if (first.is_op("+")) op = UnaryOp::Pos;
    if (first.is_op("~")) op = UnaryOp::Invert;
    if (op) {
      NestGuard guard(*this, first);
      advance();
      auto operand = parse_factor();
      return make_expr(span_from(first), ast::Unary{*op, std::move(operand)});
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    const Token& first = peek();
    auto base = parse_primary();
    if (accept_op("**")) {
      auto exp = parse_factor();
      return make_expr(span_from(first),
                       ast::Binary{BinaryOp::Pow, std::move(base), std::move(exp)});
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token& first = peek();
    auto e = parse_atom();
    while (true) {
      if (accept_op("(")) {
        ast::Call call;
        call.func = std::move(e);
        parse_call_arguments(call);
        expect_op(")");
        e = make_expr(span_from(first), std::move(call));
      } else if (accept_op("[")) {
        auto index = parse_subscript_list();
        expect_op("]");
        e = make_expr(span_from(first), ast::Subscript{std::move(e), std::move(index)});
      } else if (accept_op(".")) {
        const Token& nt = peek();
        if (nt.kind != TokenKind::Name) fail("invalid syntax", nt);
        advance();
        e = make_expr(span_from(first), ast::Attribute{std::move(e), nt.text});
      } else {
        break;
      }
    }
    return e;
  }

  void parse_call_arguments(ast::Call& call) {
    bool saw_keyword = false;
    std::set<std::string> names;
    while (!at_op(")")) {
      const Token& t = peek();
      if (accept_op("**")) {
        call.keywords.push_back(ast::Keyword{"", parse_test()});
        saw_keyword = true;
      } else if (at_op("*")) {
        call.args.push_back(parse_star_or_test());
      } else if (t.kind == TokenKind::Name && peek(1).is_op("=")) {
        if (is_keyword(t.text)) fail("invalid syntax", t);
        advance();
        advance();
        if (!names.insert(t.text).second) fail("keyword argument repeated: " + t.text, t);
        call.keywords.push_back(ast::Keyword{t.text, parse_test()});
        saw_keyword = true;
      } else {
        if (saw_keyword) fail("positional argument follows keyword argument", t);
        auto arg = parse_test();
        if (at_kw("for")) {
          if (!call.args.empty() || !call.keywords.empty()) {
            fail("generator expression must be parenthesized", t);
          }
          ast::ListComp comp;
          comp.elt = std::move(arg);
          comp.generator = true;
          parse_comprehension_clauses(comp.generators);
          call.args.push_back(make_expr(span_from(t), std::move(comp)));
          if (at_op(",") && !peek(1).is_op(")")) {
            fail("generator expression must be parenthesized", peek());
          }
        } else {
          call.args.push_back(std::move(arg));
        }
      }
      if (!accept_op(",")) break;
    }
  }

  ExprPtr parse_subscript_item() {
    const Token& first = peek();
    ExprPtr lower;
    if (!at_op(":")) {
      lower = parse_test();
      if (!at_op(":")) return lower;
    }
    advance();  // ':'
    ast::Slice s;
    s.lower = std::move(lower);
    if (!at_op("]") && !at_op(":") && !at_op(",")) s.upper = parse_test();
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) s.step = parse_test();
    }
    return make_expr(span_from(first), std::move(s));
  }

  ExprPtr parse_subscript_list() {
    const Token& first = peek();
    auto e = parse_subscript_item();
    if (!at_op(",")) return e;
    ast::TupleDisplay tup;
    tup.elts.push_back(std::move(e));
    while (accept_op(",")) {
      if (at_op("]")) break;
      tup.elts.push_back(parse_subscript_item());
    }
    return make_expr(span_from(first), std::move(tup));
  }

  void parse_comprehension_clauses(std::vector<ast::Comprehension>& out) {
    while (at_kw("for") || at_kw("async")) {
      if (at_kw("async")) fail("async constructs are not supported", peek());
      advance();
      ast::Comprehension c;
      c.target = parse_target_list();
      check_target(*c.target, "assign to");
      expect_kw("in");
      c.iter = parse_or_test();
      while (accept_kw("if")) c.ifs.push_back(parse_or_test());
      out.push_back(std::move(c));
    }
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Int:
        advance();
        return make_expr(span_from(t), ast::Constant{t.int_value});
      case TokenKind::Float:
        advance();
        return make_expr(span_from(t), ast::Constant{t.float_value});
      case TokenKind::String: return parse_strings();
      case TokenKind::Name: {
        const std::string& w = t.text;
        if (w == "None" || w == "True" || w == "False") {
          advance();
          ast::Constant c;
          if (w == "None") {
            c.value = std::monostate{};
          } else {
            c.value = (w == "True");
          }
          return make_expr(span_from(t), std::move(c));
        }
        if (w == "yield") fail("generators are not supported", t);
        if (w == "await" || w == "async") fail("async constructs are not supported", t);
        if (is_keyword(w)) fail("invalid syntax", t);
        advance();
        return make_expr(span_from(t), ast::Name{w});
      }
      case TokenKind::Op: break;
      default: fail("invalid syntax", t);
    }

    NestGuard guard(*this, t);
    if (accept_op("(")) {
      if (accept_op(")")) return make_expr(span_from(t), ast::TupleDisplay{});
      if (at_kw("yield")) fail("generators are not supported", peek());
      auto first = parse_star_or_test();
      if (at_kw("for")) {
        ast::ListComp comp;
        comp.elt = std::move(first);
        comp.generator = true;
        parse_comprehension_clauses(comp.generators);
        expect_op(")");
        return make_expr(span_from(t), std::move(comp));
      }
      if (at_op(":=")) fail("assignment expressions are not supported", peek());
      if (!at_op(",")) {
        expect_op(")");
        reject_bare_starred(*first);
        return first;
      }
      ast::TupleDisplay tup;
      tup.elts.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op(")")) break;
        tup.elts.push_back(parse_star_or_test());
      }
      expect_op(")");
      return make_expr(span_from(t), std::move(tup));
    }
    if (accept_op("[")) {
      ast::ListDisplay list;
      if (accept_op("]")) return make_expr(span_from(t), std::move(list));
      auto first = parse_star_or_test();
      if (at_kw("for")) {
        ast::ListComp comp;
        comp.elt = std::move(first);
        parse_comprehension_clauses(comp.generators);
        expect_op("]");
        return make_expr(span_from(t), std::move(comp));
      }
      list.elts.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op("]")) break;
        list.elts.push_back(parse_star_or_test());
      }
      expect_op("]");
      return make_expr(span_from(t), std::move(list));
    }
    if (accept_op("{")) {
      ast::DictDisplay dict;
      if (accept_op("}")) return make_expr(span_from(t), std::move(dict));
      auto parse_item = [&]() {
        if (accept_op("**")) {
          dict.items.emplace_back(nullptr, parse_bitor());
          return;
        }
        auto key = parse_test();
        if (!at_op(":")) fail("set literals are not supported", t);
        advance();
        dict.items.emplace_back(std::move(key), parse_test());
      };
      parse_item();
      if (at_kw("for") && dict.items.size() == 1 && dict.items[0].first) {
        ast::DictComp comp;
        comp.key = std::move(dict.items[0].first);
        comp.value = std::move(dict.items[0].second);
        parse_comprehension_clauses(comp.generators);
        expect_op("}");
        return make_expr(span_from(t), std::move(comp));
      }
      while (accept_op(",")) {
        if (at_op("}")) break;
        parse_item();
      }
      expect_op("}");
      return make_expr(span_from(t), std::move(dict));
    }
    if (t.is_op("...")) fail("Ellipsis is not supported", t);
    fail("invalid syntax", t);
  }

  // ---- strings -------------------------------------------------------------

  ExprPtr parse_strings() {
    const Token& first = peek();
    bool any_f = false;
    std::vector<const Token*> parts;
    while (peek().kind == TokenKind::String) {
      parts.push_back(&advance());
      any_f = any_f || parts.back()->fstring;
    }
    if (!any_f) {
      std::string s;
      for (const auto* p : parts) s += p->value;
      return make_expr(span_from(first), ast::Constant{std::move(s)});
    }
    Span whole = span_from(first);
    ast::FString fs;
    for (const auto* p : parts) {
      if (p->fstring) {
        parse_fstring_body(p->content_begin, p->content_end, p->raw, fs.parts);
      } else {
        append_literal(fs.parts, p->value);
      }
    }
    return make_expr(whole, std::move(fs));
  }

  static void append_literal(std::vector<ast::FStringPart>& parts, const std::string& text) {
    if (text.empty()) return;
    if (!parts.empty() && !parts.back().expr) {
      parts.back().literal += text;
      return;
    }
    ast::FStringPart p;
    p.literal = text;
    parts.push_back(std::move(p));
  }

  [[noreturn]] void fail_offset(const std::string& msg, std::size_t offset) const {
    throw ParseError(msg, lines_.position(offset));
  }

  // Finds the end of a replacement-field expression starting at `i`:
  // the first top-level '}', ':' or '!' (not part of '!=').
  std::size_t scan_field_expression(std::size_t i, std::size_t end) const {
    int depth = 0;
    while (i < end) {
      char c = src_[i];
      if (c == '\'' || c == '"') {
        char q = c;
        ++i;
        while (i < end && src_[i] != q) {
          if (src_[i] == '\\') ++i;
          ++i;
        }
        if (i >= end) fail_offset("f-string: unterminated string", i);
        ++i;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') {
        if (depth == 0) {
          if (c == '}') return i;
          fail_offset("f-string: unmatched '" + std::string(1, c) + "'", i);
        }
        --depth;
      }
      if (depth == 0) {
        if (c == ':') return i;
        if (c == '!' && (i + 1 >= end || src_[i + 1] != '=')) return i;
        if (c == '=' && i + 1 < end && (src_[i + 1] == '}' || src_[i + 1] == '!' || src_[i + 1] == ':')) {
          char prev = i > 0 ? src_[i - 1] : ' ';
          if (prev != '=' && prev != '!' && prev != '<' && prev != '>') return i;
        }
      }
      ++i;
    }
    fail_offset("f-string: expecting '}'", i);
  }

  void parse_fstring_body(std::size_t begin, std::size_t end, bool raw,
                          std::vector<ast::FStringPart>& out) {
    std::size_t chunk = begin;
    auto flush = [&](std::size_t upto) {
      if (upto <= chunk) return;
      std::string_view body(src_.data() + chunk, upto - chunk);
      append_literal(out, raw ? std::string(body) : decode_escapes(body, chunk, lines_));
    };
    std::size_t i = begin;
    while (i < end) {
      char c = src_[i];
      if (c == '\\' && !raw) {
        i += 2;
        continue;
      }
      if (c == '}') {
        if (i + 1 < end && src_[i + 1] == '}') {
          flush(i + 1);
          i += 2;
          chunk = i;
          continue;
        }
        fail_offset("f-string: single '}' is not allowed", i);
      }
      if (c != '{') {
        ++i;
        continue;
      }
      if (i + 1 < end && src_[i + 1] == '{') {
        flush(i + 1);
        i += 2;
        chunk = i;
        continue;
      }
      flush(i);
      std::size_t expr_begin = i + 1;
      std::size_t expr_end = scan_field_expression(expr_begin, end);
      ast::FStringPart part;
      part.expr = parse_subexpression(expr_begin, expr_end);
      std::size_t j = expr_end;
      if (src_[j] == '=') {
        append_literal(out, std::string(src_.substr(expr_begin, j + 1 - expr_begin)));
        part.conversion = 'r';
        ++j;
      }
      if (j < end && src_[j] == '!') {
        if (j + 1 >= end || std::string_view("rsa").find(src_[j + 1]) == std::string_view::npos) {
          fail_offset("f-string: invalid conversion character", j + 1);
        }
        part.conversion = src_[j + 1];
        j += 2;
      }
      if (j < end && src_[j] == ':') {
        std::size_t spec_begin = j + 1;
        int depth = 0;
        std::size_t k = spec_begin;
        while (k < end) {
          if (src_[k] == '{') ++depth;
          if (src_[k] == '}') {
            if (depth == 0) break;
            --depth;
          }
          ++k;
        }
        if (k >= end) fail_offset("f-string: expecting '}'", k);
        if (part.conversion == 'r' && src_[expr_end] == '=') part.conversion = 0;
        ast::FString spec;
        NestGuard guard(*this, peek());
        parse_fstring_body(spec_begin, k, raw, spec.parts);
        auto pos = lines_.position(spec_begin);
        part.format_spec = make_expr(Span{spec_begin, k, pos.line, pos.column}, std::move(spec));
        j = k;
      }
      if (j >= end || src_[j] != '}') fail_offset("f-string: expecting '}'", j);
      out.push_back(std::move(part));
      i = j + 1;
      chunk = i;
    }
    flush(end);
  }

  ExprPtr parse_subexpression(std::size_t begin, std::size_t end) {
    auto toks = tokenize(src_, lines_, begin, end, true);
    Parser sub(src_, lines_, std::move(toks), nesting_ + 1);
    sub.func_depth_ = func_depth_;
    return sub.parse_field_expression();
  }

  const std::string& src_;
  const LineIndex& lines_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::size_t prev_end_ = 0;
  int nesting_ = 0;
  int loop_depth_ = 0;
  int func_depth_ = 0;
};

}  // namespace

ScriptProgram parse(std::string source) {
  auto module = std::make_shared<Module>();
  module->source = std::move(source);
  LineIndex lines(module->source);
  auto toks = tokenize(module->source, lines, 0, module->source.size(), false);
  Parser p(module->source, lines, std::move(toks), 0);
  module->body = p.parse_module();
  ScriptProgram prog;
  prog.module_ = std::move(module);
  return prog;
}

}  // namespace pathagent::script
