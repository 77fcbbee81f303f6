#include "pathagent/script/ast.hpp"

#include "pathagent/script/value.hpp"

namespace pathagent::script {

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::FloorDiv: return "//";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Pow: return "**";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::BitXor: return "^";
    case BinaryOp::LShift: return "<<";
    case BinaryOp::RShift: return ">>";
  }
  return "?";
}

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::NotEq: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::LtE: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::GtE: return ">=";
    case CompareOp::In: return "in";
    case CompareOp::NotIn: return "not in";
    case CompareOp::Is: return "is";
    case CompareOp::IsNot: return "is not";
  }
  return "?";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string opt(const ExprPtr& e) { return e ? dump(*e) : "_"; }

std::string dump_block(const Block& b) {
  std::string out = "(Block";
  for (const auto& s : b) out += " " + dump(*s);
  return out + ")";
}

std::string dump_params(const ast::Parameters& p) {
  std::string out = "(params";
  for (const auto& prm : p.params) {
    out += " " + prm.name;
    if (prm.default_value) out += "=" + dump(*prm.default_value);
  }
  if (!p.vararg.empty()) out += " *" + p.vararg;
  if (!p.kwarg.empty()) out += " **" + p.kwarg;
  return out + ")";
}

std::string dump_generators(const std::vector<ast::Comprehension>& gens) {
  std::string out;
  for (const auto& g : gens) {
    out += " (for " + dump(*g.target) + " " + dump(*g.iter);
    for (const auto& c : g.ifs) out += " (if " + dump(*c) + ")";
    out += ")";
  }
  return out;
}

std::string dump_list(const char* head, const std::vector<ExprPtr>& elts) {
  std::string out = std::string("(") + head;
  for (const auto& e : elts) out += " " + dump(*e);
  return out + ")";
}

}  // namespace

std::string dump(const Expr& e) {
  return std::visit(
      overloaded{
          [](const ast::Name& n) { return "(Name " + n.id + ")"; },
          [](const ast::Constant& c) {
            return std::visit(overloaded{
                                  [](std::monostate) { return std::string("(Const None)"); },
                                  [](bool b) { return std::string(b ? "(Const True)" : "(Const False)"); },
                                  [](std::int64_t i) { return "(Const " + std::to_string(i) + ")"; },
                                  [](double d) { return "(Const " + float_repr(d) + ")"; },
                                  [](const std::string& s) { return "(Const " + repr(Value::string(s)) + ")"; },
                              },
                              c.value);
          },
          [](const ast::FString& f) {
            std::string out = "(FString";
            for (const auto& p : f.parts) {
              if (!p.expr) {
                out += " " + repr(Value::string(p.literal));
                continue;
              }
              out += " (Field " + dump(*p.expr);
              if (p.conversion) out += std::string(" !") + p.conversion;
              if (p.format_spec) out += " " + dump(*p.format_spec);
              out += ")";
            }
            return out + ")";
          },
          [](const ast::ListDisplay& l) { return dump_list("List", l.elts); },
          [](const ast::TupleDisplay& t) { return dump_list("Tuple", t.elts); },
          [](const ast::DictDisplay& d) {
            std::string out = "(Dict";
            for (const auto& [k, v] : d.items) {
              out += k ? " (" + dump(*k) + " " + dump(*v) + ")" : " (** " + dump(*v) + ")";
            }
            return out + ")";
          },
          [](const ast::Binary& b) {
            return std::string("(BinOp ") + to_string(b.op) + " " + dump(*b.left) + " " +
                   dump(*b.right) + ")";
          },
          [](const ast::Unary& u) {
            const char* op = u.op == UnaryOp::Neg   ? "-"
                             : u.op == UnaryOp::Pos ? "+"
                             : u.op == UnaryOp::Not ? "not"
                                                    : "~";
            return std::string("(UnaryOp ") + op + " " + dump(*u.operand) + ")";
          },
          [](const ast::BoolOp& b) {
            std::string out = b.op == BoolOpKind::And ? "(BoolOp and" : "(BoolOp or";
            for (const auto& v : b.values) out += " " + dump(*v);
            return out + ")";
          },
          [](const ast::Compare& c) {
            std::string out = "(Compare " + dump(*c.left);
            for (std::size_t i = 0; i < c.ops.size(); ++i) {
              out += std::string(" ") + to_string(c.ops[i]) + " " + dump(*c.comparators[i]);
            }
            return out + ")";
          },
          [](const ast::IfExp& i) {
            return "(IfExp " + dump(*i.test) + " " + dump(*i.body) + " " + dump(*i.orelse) + ")";
          },
          [](const ast::Call& c) {
            std::string out = "(Call " + dump(*c.func);
            for (const auto& a : c.args) out += " " + dump(*a);
            for (const auto& k : c.keywords) {
              out += k.name.empty() ? " (** " + dump(*k.value) + ")"
                                    : " (kw " + k.name + " " + dump(*k.value) + ")";
            }
            return out + ")";
          },
          [](const ast::Starred& s) { return "(Starred " + dump(*s.value) + ")"; },
          [](const ast::Attribute& a) { return "(Attr " + dump(*a.value) + " " + a.attr + ")"; },
          [](const ast::Subscript& s) {
            return "(Subscript " + dump(*s.value) + " " + dump(*s.index) + ")";
          },
          [](const ast::Slice& s) {
            return "(Slice " + opt(s.lower) + " " + opt(s.upper) + " " + opt(s.step) + ")";
          },
          [](const ast::ListComp& c) {
            return std::string(c.generator ? "(GenExp " : "(ListComp ") + dump(*c.elt) +
                   dump_generators(c.generators) + ")";
          },
          [](const ast::DictComp& c) {
            return "(DictComp " + dump(*c.key) + " " + dump(*c.value) +
                   dump_generators(c.generators) + ")";
          },
          [](const ast::Lambda& l) {
            return "(Lambda " + dump_params(*l.params) + " " + dump(*l.body) + ")";
          },
      },
      e.node);
}

std::string dump(const Stmt& s) {
  return std::visit(
      overloaded{
          [](const ast::ExprStmt& e) { return "(Expr " + dump(*e.value) + ")"; },
          [](const ast::Assign& a) {
            std::string out = "(Assign [";
            for (std::size_t i = 0; i < a.targets.size(); ++i) {
              out += (i ? " " : "") + dump(*a.targets[i]);
            }
            return out + "] " + dump(*a.value) + ")";
          },
          [](const ast::AnnAssign& a) {
            return "(AnnAssign " + dump(*a.target) + " " + dump(*a.annotation) + " " +
                   opt(a.value) + ")";
          },
          [](const ast::AugAssign& a) {
            return "(AugAssign " + dump(*a.target) + " " + to_string(a.op) + "= " +
                   dump(*a.value) + ")";
          },
          [](const ast::If& i) {
            std::string out = "(If " + dump(*i.test) + " " + dump_block(i.body);
            if (!i.orelse.empty()) out += " " + dump_block(i.orelse);
            return out + ")";
          },
          [](const ast::For& f) {
            return "(For " + dump(*f.target) + " " + dump(*f.iter) + " " + dump_block(f.body) + ")";
          },
          [](const ast::While& w) {
            return "(While " + dump(*w.test) + " " + dump_block(w.body) + ")";
          },
          [](const ast::FunctionDef& f) {
            return "(Def " + f.name + " " + dump_params(*f.params) + " " + dump_block(f.body) + ")";
          },
          [](const ast::Return& r) { return "(Return " + opt(r.value) + ")"; },
          [](const ast::Break&) { return std::string("(Break)"); },
          [](const ast::Continue&) { return std::string("(Continue)"); },
          [](const ast::Pass&) { return std::string("(Pass)"); },
          [](const ast::Import& i) {
            std::string out = "(Import";
            for (const auto& a : i.names) {
              out += a.asname.empty() ? " " + a.name : " (" + a.name + " as " + a.asname + ")";
            }
            return out + ")";
          },
          [](const ast::ImportFrom& i) {
            std::string out = "(ImportFrom " + i.module;
            for (const auto& a : i.names) {
              out += a.asname.empty() ? " " + a.name : " (" + a.name + " as " + a.asname + ")";
            }
            return out + ")";
          },
          [](const ast::Try& t) {
            return "(Try " + dump_block(t.body) + " " + opt(t.handler_type) + " " +
                   (t.handler_name.empty() ? "_" : t.handler_name) + " " +
                   dump_block(t.handler) + ")";
          },
          [](const ast::Delete& d) { return dump_list("Delete", d.targets); },
          [](const ast::Assert& a) { return "(Assert " + dump(*a.test) + " " + opt(a.msg) + ")"; },
          [](const ast::Global& g) {
            std::string out = "(Global";
            for (const auto& n : g.names) out += " " + n;
            return out + ")";
          },
      },
      s.node);
}

std::string dump(const Module& m) {
  std::string out = "(Module";
  for (const auto& s : m.body) out += " " + dump(*s);
  return out + ")";
}

namespace {

std::size_t count(const Expr& e);
std::size_t count(const Stmt& s);

std::size_t count(const ExprPtr& e) { return e ? count(*e) : 0; }

std::size_t count(const Block& b) {
  std::size_t n = 0;
  for (const auto& s : b) n += count(*s);
  return n;
}

std::size_t count(const std::vector<ExprPtr>& v) {
  std::size_t n = 0;
  for (const auto& e : v) n += count(*e);
  return n;
}

std::size_t count(const ast::Parameters& p) {
  std::size_t n = 0;
  for (const auto& prm : p.params) n += count(prm.default_value);
  return n;
}

std::size_t count(const std::vector<ast::Comprehension>& gens) {
  std::size_t n = 0;
  for (const auto& g : gens) n += count(g.target) + count(g.iter) + count(g.ifs);
  return n;
}

std::size_t count(const Expr& e) {
  return 1 + std::visit(
                 overloaded{
                     [](const ast::Name&) -> std::size_t { return 0; },
                     [](const ast::Constant&) -> std::size_t { return 0; },
                     [](const ast::FString& f) {
                       std::size_t n = 0;
                       for (const auto& p : f.parts) n += count(p.expr) + count(p.format_spec);
                       return n;
                     },
                     [](const ast::ListDisplay& l) { return count(l.elts); },
                     [](const ast::TupleDisplay& t) { return count(t.elts); },
                     [](const ast::DictDisplay& d) {
                       std::size_t n = 0;
                       for (const auto& [k, v] : d.items) n += count(k) + count(v);
                       return n;
                     },
                     [](const ast::Binary& b) { return count(b.left) + count(b.right); },
                     [](const ast::Unary& u) { return count(u.operand); },
                     [](const ast::BoolOp& b) { return count(b.values); },
                     [](const ast::Compare& c) { return count(c.left) + count(c.comparators); },
                     [](const ast::IfExp& i) {
                       return count(i.test) + count(i.body) + count(i.orelse);
                     },
                     [](const ast::Call& c) {
                       std::size_t n = count(c.func) + count(c.args);
                       for (const auto& k : c.keywords) n += count(k.value);
                       return n;
                     },
                     [](const ast::Starred& s) { return count(s.value); },
                     [](const ast::Attribute& a) { return count(a.value); },
                     [](const ast::Subscript& s) { return count(s.value) + count(s.index); },
                     [](const ast::Slice& s) {
                       return count(s.lower) + count(s.upper) + count(s.step);
                     },
                     [](const ast::ListComp& c) { return count(c.elt) + count(c.generators); },
                     [](const ast::DictComp& c) {
                       return count(c.key) + count(c.value) + count(c.generators);
                     },
                     [](const ast::Lambda& l) { return count(*l.params) + count(l.body); },
                 },
                 e.node);
}

std::size_t count(const Stmt& s) {
  return 1 + std::visit(
                 overloaded{
                     [](const ast::ExprStmt& e) { return count(e.value); },
                     [](const ast::Assign& a) { return count(a.targets) + count(a.value); },
                     [](const ast::AnnAssign& a) {
                       return count(a.target) + count(a.annotation) + count(a.value);
                     },
                     [](const ast::AugAssign& a) { return count(a.target) + count(a.value); },
                     [](const ast::If& i) {
                       return count(i.test) + count(i.body) + count(i.orelse);
                     },
                     [](const ast::For& f) {
                       return count(f.target) + count(f.iter) + count(f.body);
                     },
                     [](const ast::While& w) { return count(w.test) + count(w.body); },
                     [](const ast::FunctionDef& f) { return count(*f.params) + count(f.body); },
                     [](const ast::Return& r) { return count(r.value); },
                     [](const ast::Break&) -> std::size_t { return 0; },
                     [](const ast::Continue&) -> std::size_t { return 0; },
                     [](const ast::Pass&) -> std::size_t { return 0; },
                     [](const ast::Import&) -> std::size_t { return 0; },
                     [](const ast::ImportFrom&) -> std::size_t { return 0; },
                     [](const ast::Try& t) {
                       return count(t.body) + count(t.handler_type) + count(t.handler);
                     },
                     [](const ast::Delete& d) { return count(d.targets); },
                     [](const ast::Assert& a) { return count(a.test) + count(a.msg); },
                     [](const ast::Global&) -> std::size_t { return 0; },
                 },
                 s.node);
}

}  // namespace

std::size_t count_nodes(const Module& m) { return count(m.body); }

}  // namespace pathagent::script
