#include <cstdio>

#include "muit/dsl/parser.hpp"

namespace muit::dsl {

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

std::string type_text(const TypeRef& t) {
  std::string out = t.name;
  if (!t.args.empty()) {
    out += '<';
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += ", ";
      out += type_text(t.args[i]);
    }
    out += '>';
  }
  return out;
}

class Printer {
 public:
  std::string out;

  void module(const DslModule& m) {
    for (const auto& v : m.variables) {
      out += "var " + v.name;
      if (v.init) out += " = " + expr(*v.init);
      out += ";\n";
    }
    for (const auto& e : m.entities) {
      sep();
      out += "entity " + e.name + " {\n";
      for (const auto& p : e.properties) {
        out += "  ";
        if (p.type.empty()) {
          out += p.name + ": " + defaults(p);
        } else {
          out += type_text(p.type) + " " + p.name;
          if (!p.defaults.empty()) out += ": " + defaults(p);
        }
        for (const auto& a : p.annotations) out += " @" + a;
        out += ";\n";
      }
      out += "}\n";
    }
    for (const auto& op : m.operations) {
      sep();
      if (op.async) out += "async ";
      out += "operation " + op.name + params(op.params) + " ";
      block(op.body, 0);
      out += "\n";
    }
    for (const auto& w : m.widgets) decl("widget", w);
    for (const auto& t : m.touches) decl("touch", t);
    for (const auto& s : m.screens) {
      sep();
      out += "screen " + s.name;
      if (!s.params.empty()) out += params(s.params);
      if (s.cached_offline) out += " offline";
      out += " ";
      items(s.items, 0);
      out += "\n";
    }
  }

  void sep() {
    if (!out.empty()) out += "\n";
  }

  void decl(const char* keyword, const WidgetDecl& w) {
    sep();
    out += std::string(keyword) + " " + w.kind + " " + w.name + params(w.params) + " ";
    items(w.body, 0);
    out += "\n";
  }

  std::string defaults(const PropertyDecl& p) {
    std::string s;
    for (std::size_t i = 0; i < p.defaults.size(); ++i) {
      if (i) s += p.enumeration ? " | " : ", ";
      s += expr(p.defaults[i]);
    }
    return s;
  }

  static std::string params(const std::vector<Param>& ps) {
    std::string s = "(";
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i) s += ", ";
      if (!ps[i].type.empty()) s += type_text(ps[i].type) + " ";
      s += ps[i].name;
    }
    return s + ")";
  }

  static void indent(std::string& s, int level) { s.append(static_cast<std::size_t>(level) * 2, ' '); }

  std::string expr(const Expr& e) {
    return std::visit([&](const auto& n) { return node(n); }, e.node);
  }

  std::string node(const LiteralExpr& l) {
    switch (l.kind) {
      case LiteralExpr::Kind::String: return quote(l.text);
      case LiteralExpr::Kind::Boolean: return l.bool_value ? "true" : "false";
      default: return l.text;
    }
  }
  std::string node(const NameExpr& n) { return n.name; }
  std::string node(const BinaryExpr& b) {
    return "(" + expr(*b.lhs) + " " + std::string(to_string(b.op)) + " " + expr(*b.rhs) + ")";
  }
  std::string node(const UnaryExpr& u) {
    // A space keeps `- -1` from reading as anything else.
    return std::string(to_string(u.op)) + " " + expr(*u.operand);
  }
  std::string node(const CallExpr& c) { return expr(*c.callee) + args(c.args); }
  std::string node(const MemberExpr& m) { return expr(*m.object) + "." + m.member; }
  std::string node(const BlockExpr& b) {
    Printer p;
    p.block(b.body, 0, true);
    return p.out;
  }
  std::string node(const NewExpr& n) { return "new " + n.screen + args(n.args); }

  std::string args(const std::vector<Expr>& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) s += ", ";
      s += expr(a[i]);
    }
    return s + ")";
  }

  // Blocks print on one line when inline (inside expressions), otherwise
  // one statement per line.
  void block(const std::vector<Stmt>& body, int level, bool inline_form = false) {
    if (body.empty()) {
      out += "{}";
      return;
    }
    if (inline_form) {
      out += "{ ";
      for (const auto& s : body) {
        stmt(s, -1);
        out += " ";
      }
      out += "}";
      return;
    }
    out += "{\n";
    for (const auto& s : body) {
      indent(out, level + 1);
      stmt(s, level + 1);
      out += "\n";
    }
    indent(out, level);
    out += "}";
  }

  // level < 0 prints nested blocks inline.
  void sub_block(const std::vector<Stmt>& body, int level) {
    if (level < 0) {
      block(body, 0, true);
    } else {
      block(body, level);
    }
  }

  void stmt(const Stmt& s, int level) {
    std::visit([&](const auto& n) { stmt_node(n, level); }, s.node);
  }

  void stmt_node(const VarStmt& v, int) {
    out += "var " + v.name;
    if (v.init) out += " = " + expr(*v.init);
    out += ";";
  }
  void stmt_node(const AssignStmt& a, int) { out += expr(a.target) + " = " + expr(a.value) + ";"; }
  void stmt_node(const ForeachStmt& f, int level) {
    out += "foreach (" + f.var + " in " + expr(f.iterable) + ") ";
    sub_block(f.body, level);
  }
  void stmt_node(const IfStmt& s, int level) {
    for (std::size_t i = 0; i < s.branches.size(); ++i) {
      out += i ? " elseif (" : "if (";
      out += expr(s.branches[i].condition) + ") ";
      sub_block(s.branches[i].body, level);
    }
    if (s.else_body) {
      out += " else ";
      sub_block(*s.else_body, level);
    }
  }
  void stmt_node(const ReturnStmt& r, int) {
    out += "return";
    if (r.value) out += " " + expr(*r.value);
    out += ";";
  }
  void stmt_node(const ExprStmt& e, int) { out += expr(e.expr) + ";"; }
  void stmt_node(const FunctionStmt& f, int level) {
    out += "function " + f.name + params(f.params) + " ";
    sub_block(f.body, level);
  }

  void items(const std::vector<ScreenItem>& list, int level) {
    if (list.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    for (const auto& it : list) {
      indent(out, level + 1);
      item(it, level + 1);
      out += "\n";
    }
    indent(out, level);
    out += "}";
  }

  void item(const ScreenItem& it, int level) {
    std::visit([&](const auto& n) { item_node(n, level); }, it.node);
  }

  void item_node(const Element& el, int level) {
    if (el.markup) {
      markup(el, level);
      return;
    }
    out += el.tag + " {";
    bool any = false;
    auto next = [&] {
      out += any ? ", " : " ";
      any = true;
    };
    for (const auto& c : el.contents) {
      next();
      out += expr(c);
    }
    for (const auto& a : el.attributes) {
      next();
      out += a.name + " = " + expr(a.value);
    }
    for (const auto& c : el.children) {
      next();
      item(c, -1);
    }
    for (const auto& s : el.actions) {
      next();
      stmt(s, -1);
    }
    out += any ? " }" : "}";
    (void)level;
  }

  void markup(const Element& el, int level) {
    out += "<" + el.tag;
    for (const auto& a : el.attributes) {
      out += " " + a.name + "=";
      std::string v = expr(a.value);
      // Keep non-trivial values unambiguous inside markup.
      if (std::holds_alternative<BinaryExpr>(a.value.node) ||
          std::holds_alternative<LiteralExpr>(a.value.node) ||
          std::holds_alternative<NameExpr>(a.value.node) ||
          std::holds_alternative<MemberExpr>(a.value.node) ||
          std::holds_alternative<CallExpr>(a.value.node) ||
          std::holds_alternative<BlockExpr>(a.value.node)) {
        out += v;
      } else {
        out += "(" + v + ")";
      }
    }
    if (el.contents.empty() && el.children.empty()) {
      out += "/>";
      return;
    }
    out += ">";
    for (const auto& c : el.contents) out += " " + expr(c);
    for (const auto& c : el.children) {
      out += " ";
      item(c, level < 0 ? -1 : level);
    }
    out += " </" + el.tag + ">";
  }

  void nested_items(const std::vector<ScreenItem>& list, int level) {
    if (level < 0) {
      out += "{";
      for (const auto& it : list) {
        out += " ";
        item(it, -1);
      }
      out += list.empty() ? "}" : " }";
    } else {
      items(list, level);
    }
  }

  void item_node(const HeaderItem& h, int level) {
    out += "header(" + expr(h.title) + ")";
    if (h.body.empty()) {
      out += ";";
    } else {
      out += " ";
      nested_items(h.body, level);
    }
  }
  void item_node(const ImportItem& i, int) { out += "import(" + expr(i.target) + ");"; }
  void item_node(const HandlerItem& h, int level) {
    out += "handler ";
    nested_items(h.items, level);
  }
  void item_node(const RuleItem& r, int level) {
    for (std::size_t i = 0; i < r.rule.branches.size(); ++i) {
      const auto& b = r.rule.branches[i];
      out += i ? " elseif (" : "if (";
      out += b.context.trigger == ContextTrigger::When ? "when (" : "where (";
      out += expr(b.context.condition) + ")) ";
      nested_items(b.adaptation, level);
    }
    if (r.rule.otherwise) {
      out += " else ";
      nested_items(*r.rule.otherwise, level);
    }
  }
  void item_node(const VarItem& v, int level) { stmt_node(v.var, level); }
  void item_node(const ForeachItem& f, int level) {
    out += "foreach (" + f.var + " in " + expr(f.iterable) + ") ";
    nested_items(f.body, level);
  }
  void item_node(const StmtItem& s, int level) { stmt(s.stmt, level); }
};

}  // namespace

std::string print(const DslModule& module) {
  Printer p;
  p.module(module);
  return p.out;
}

std::string print(const Expr& expr) {
  Printer p;
  return p.expr(expr);
}

}  // namespace muit::dsl
