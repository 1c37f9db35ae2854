#include "js.hpp"

#include <nlohmann/json.hpp>

namespace muit::codegen::detail {

using namespace muit::dsl;

namespace {

std::string pad(int n) { return std::string(static_cast<std::size_t>(n) * 2, ' '); }

}  // namespace

std::string js_string(std::string_view s) {
  std::string out = nlohmann::json(std::string(s)).dump();
  // Keep "</script" and friends out of inline scripts.
  std::string safe;
  safe.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == '<' && i + 1 < out.size() && out[i + 1] == '/') {
      safe += "<\\/";
      ++i;
    } else {
      safe += out[i];
    }
  }
  return safe;
}

bool JsEmitter::is_local(const std::string& name) const {
  for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
    if (it->vars.count(name)) return true;
  }
  return false;
}

bool JsEmitter::is_local_function(const std::string& name) const {
  for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
    if (it->functions.count(name)) return true;
    if (it->vars.count(name)) return false;
  }
  return false;
}

bool JsEmitter::is_global(const std::string& name) const { return module_.find_variable(name) != nullptr; }

std::string JsEmitter::args(const std::vector<Expr>& xs, std::size_t from) {
  std::string out = "[";
  for (std::size_t i = from; i < xs.size(); ++i) {
    if (i > from) out += ", ";
    out += expr(xs[i]);
  }
  return out + "]";
}

std::string JsEmitter::expr(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LiteralExpr>) {
          switch (n.kind) {
            case LiteralExpr::Kind::Int: return std::to_string(n.int_value);
            case LiteralExpr::Kind::Boolean: return n.bool_value ? "true" : "false";
            default: return js_string(n.text);
          }
        } else if constexpr (std::is_same_v<T, NameExpr>) {
          const std::string& name = n.name;
          if (is_local_function(name)) return "l.f_" + name;
          if (is_local(name)) return "l.v_" + name;
          if (is_global(name)) return "m.g[" + js_string(name) + "]";
          if (module_.find_widget(name)) return "m.widget(" + js_string(name) + ")";
          if (module_.find_operation(name) || module_.find_screen(name) || module_.find_touch(name) ||
              module_.find_entity(name)) {
            return js_string(name);
          }
          if (name == "screen" || name == "network" || name == "location") return "m.ctx." + name;
          if (name == "option") return "m.option";
          return "null";
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          std::string l = expr(*n.lhs);
          std::string r = expr(*n.rhs);
          switch (n.op) {
            case BinaryOp::And: return "(m.truthy(" + l + ") && m.truthy(" + r + "))";
            case BinaryOp::Or: return "(m.truthy(" + l + ") || m.truthy(" + r + "))";
            case BinaryOp::Add: return "m.plus(" + l + ", " + r + ")";
            case BinaryOp::Sub: return "(" + l + " - " + r + ")";
            case BinaryOp::Mul: return "(" + l + " * " + r + ")";
            case BinaryOp::Mod: return "m.mod(" + l + ", " + r + ")";
            case BinaryOp::Eq: return "m.eq(" + l + ", " + r + ")";
            case BinaryOp::NotEq: return "!m.eq(" + l + ", " + r + ")";
            case BinaryOp::Less: return "m.cmp(" + l + ", " + r + ") < 0";
            case BinaryOp::Greater: return "m.cmp(" + l + ", " + r + ") > 0";
            case BinaryOp::LessEq: return "m.cmp(" + l + ", " + r + ") <= 0";
            case BinaryOp::GreaterEq: return "m.cmp(" + l + ", " + r + ") >= 0";
            case BinaryOp::In: return "m.inList(" + l + ", " + r + ")";
          }
          return "null";
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          std::string v = expr(*n.operand);
          return n.op == UnaryOp::Not ? "!m.truthy(" + v + ")" : "(-" + v + ")";
        } else if constexpr (std::is_same_v<T, MemberExpr>) {
          if (const auto* obj = std::get_if<NameExpr>(&n.object->node)) {
            if (!is_local(obj->name) && !is_global(obj->name) && module_.find_widget(obj->name)) {
              return "m.g[" + js_string(n.member) + "]";
            }
          }
          return "m.get(" + expr(*n.object) + ", " + js_string(n.member) + ")";
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          return call(n);
        } else if constexpr (std::is_same_v<T, BlockExpr>) {
          push_scope();
          std::string body = stmts(n.body, 1);
          pop_scope();
          return "(function () {\n" + body + "})";
        } else {
          return "m.open(" + js_string(n.screen) + ", " + args(n.args) + ")";
        }
      },
      e.node);
}

std::string JsEmitter::call(const CallExpr& c) {
  if (const auto* mem = std::get_if<MemberExpr>(&c.callee->node)) {
    const auto* ns = std::get_if<NameExpr>(&mem->object->node);
    if (ns && !is_local(ns->name) && !is_global(ns->name)) {
      if (ns->name == "history") return "m.history(" + js_string(mem->member) + ", " + args(c.args) + ")";
      if (ns->name == "DateTime") {
        if (mem->member == "now") return "m.date.now()";
        return "m.date.create(" + args(c.args) + ")";
      }
      if (module_.find_entity(ns->name)) {
        if (mem->member == "create") return "m.create(" + js_string(ns->name) + ")";
        return "m.fromList(" + js_string(ns->name) + ", " + (c.args.empty() ? "null" : expr(c.args[0])) + ")";
      }
    }
    return "m.method(" + expr(*mem->object) + ", " + js_string(mem->member) + ", " + args(c.args) + ")";
  }
  const auto* callee = std::get_if<NameExpr>(&c.callee->node);
  if (!callee) return "null";
  const std::string& n = callee->name;
  auto first = [&] { return c.args.empty() ? std::string("null") : expr(c.args[0]); };
  if (is_local_function(n)) {
    std::string out = "l.f_" + n + "(";
    for (std::size_t i = 0; i < c.args.size(); ++i) out += (i ? ", " : "") + expr(c.args[i]);
    return out + ")";
  }
  if (is_local(n)) return "m.callValue(l.v_" + n + ", " + args(c.args) + ")";
  if (module_.find_operation(n)) return "m.call(" + js_string(n) + ", " + args(c.args) + ")";
  if (n == "exist") return "m.exist(" + first() + ")";
  if (n == "navigate") return "m.navigate(" + first() + ", " + args(c.args, 1) + ")";
  if (n == "httpRequest") return "m.httpRequest(" + first() + ")";
  if (n == "invoke") return "m.invoke(" + first() + ", " + args(c.args, 1) + ")";
  if (n == "add") return "m.add(" + first() + ")";
  if (n == "select") return "m.select(" + first() + ")";
  if (module_.find_screen(n)) return "m.navigate(" + js_string(n) + ", " + args(c.args) + ")";
  return "null";
}

std::string JsEmitter::assign(const Expr& target, const std::string& value) {
  if (const auto* n = std::get_if<NameExpr>(&target.node)) {
    if (is_local(n->name)) return "l.v_" + n->name + " = " + value + ";";
    return "m.setg(" + js_string(n->name) + ", " + value + ");";
  }
  if (const auto* mem = std::get_if<MemberExpr>(&target.node)) {
    if (const auto* obj = std::get_if<NameExpr>(&mem->object->node)) {
      if (!is_local(obj->name) && !is_global(obj->name) && module_.find_widget(obj->name)) {
        return "m.setg(" + js_string(mem->member) + ", " + value + ");";
      }
    }
    return "m.set(" + expr(*mem->object) + ", " + js_string(mem->member) + ", " + value + ");";
  }
  return value + ";";
}

std::string JsEmitter::stmts(const std::vector<Stmt>& body, int indent) {
  std::string out;
  // Local functions are visible throughout their block, as in the interpreter.
  for (const auto& s : body) {
    if (const auto* fn = std::get_if<FunctionStmt>(&s.node)) scopes_.back().functions.insert(fn->name);
  }
  for (const auto& s : body) {
    if (std::holds_alternative<FunctionStmt>(s.node)) out += stmt(s, indent);
  }
  for (const auto& s : body) {
    if (!std::holds_alternative<FunctionStmt>(s.node)) out += stmt(s, indent);
  }
  return out;
}

std::string JsEmitter::stmt(const Stmt& s, int indent) {
  std::string p = pad(indent);
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarStmt>) {
          std::string v = n.init ? expr(*n.init) : "null";
          declare(n.name);
          return p + "l.v_" + n.name + " = " + v + ";\n";
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          return p + assign(n.target, expr(n.value)) + "\n";
        } else if constexpr (std::is_same_v<T, ForeachStmt>) {
          std::string it = "$" + std::to_string(temp_++);
          std::string list = expr(n.iterable);
          push_scope();
          declare(n.var);
          std::string body = stmts(n.body, indent + 1);
          pop_scope();
          return p + "for (const " + it + " of m.iter(" + list + ")) {\n" + pad(indent + 1) + "l.v_" + n.var +
                 " = " + it + ";\n" + body + p + "}\n";
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          std::string out;
          for (std::size_t i = 0; i < n.branches.size(); ++i) {
            out += (i == 0 ? p + "if" : " else if") + std::string(" (m.truthy(") + expr(n.branches[i].condition) +
                   ")) {\n";
            push_scope();
            out += stmts(n.branches[i].body, indent + 1);
            pop_scope();
            out += p + "}";
          }
          if (n.else_body) {
            push_scope();
            out += " else {\n" + stmts(*n.else_body, indent + 1) + p + "}";
            pop_scope();
          }
          return out + "\n";
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          return p + "return " + (n.value ? expr(*n.value) : "null") + ";\n";
        } else if constexpr (std::is_same_v<T, ExprStmt>) {
          return p + expr(n.expr) + ";\n";
        } else {
          std::string out = p + "l.f_" + n.name + " = (function (o) {\n" + pad(indent + 1) +
                            "return function (...a) {\n" + pad(indent + 2) + "const l = Object.create(o);\n";
          push_scope();
          for (std::size_t i = 0; i < n.params.size(); ++i) {
            declare(n.params[i].name);
            out += pad(indent + 2) + "l.v_" + n.params[i].name + " = a.length > " + std::to_string(i) + " ? a[" +
                   std::to_string(i) + "] : null;\n";
          }
          out += stmts(n.body, indent + 2);
          pop_scope();
          out += pad(indent + 2) + "return null;\n" + pad(indent + 1) + "};\n" + p + "})(l);\n";
          return out;
        }
      },
      s.node);
}

}  // namespace muit::codegen::detail
