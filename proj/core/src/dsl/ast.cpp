#include "muit/dsl/ast.hpp"

#include <algorithm>

namespace muit::dsl {

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::NotEq: return "!=";
    case BinaryOp::Less: return "<";
    case BinaryOp::Greater: return ">";
    case BinaryOp::LessEq: return "<=";
    case BinaryOp::GreaterEq: return ">=";
    case BinaryOp::Or: return "||";
    case BinaryOp::And: return "&&";
    case BinaryOp::In: return "in";
  }
  return "?";
}

std::string_view to_string(UnaryOp op) { return op == UnaryOp::Not ? "!" : "-"; }

namespace {

template <typename T>
const T* find_named(const std::vector<T>& v, std::string_view n) {
  auto it = std::find_if(v.begin(), v.end(), [&](const T& d) { return d.name == n; });
  return it == v.end() ? nullptr : &*it;
}

// Structural comparison. Written out per node so that ids, spans and
// resolved types never take part.
struct Eq {
  bool operator()(const Expr& a, const Expr& b) const {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          return node(x, std::get<T>(b.node));
        },
        a.node);
  }

  bool node(const LiteralExpr& a, const LiteralExpr& b) const {
    return a.kind == b.kind && a.text == b.text && a.int_value == b.int_value &&
           a.bool_value == b.bool_value;
  }
  bool node(const NameExpr& a, const NameExpr& b) const { return a.name == b.name; }
  bool node(const BinaryExpr& a, const BinaryExpr& b) const {
    return a.op == b.op && (*this)(*a.lhs, *b.lhs) && (*this)(*a.rhs, *b.rhs);
  }
  bool node(const UnaryExpr& a, const UnaryExpr& b) const {
    return a.op == b.op && (*this)(*a.operand, *b.operand);
  }
  bool node(const CallExpr& a, const CallExpr& b) const {
    return (*this)(*a.callee, *b.callee) && list(a.args, b.args);
  }
  bool node(const MemberExpr& a, const MemberExpr& b) const {
    return a.member == b.member && (*this)(*a.object, *b.object);
  }
  bool node(const BlockExpr& a, const BlockExpr& b) const { return list(a.body, b.body); }
  bool node(const NewExpr& a, const NewExpr& b) const {
    return a.screen == b.screen && list(a.args, b.args);
  }

  bool operator()(const Stmt& a, const Stmt& b) const {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          return node(x, std::get<T>(b.node));
        },
        a.node);
  }

  bool node(const VarStmt& a, const VarStmt& b) const {
    return a.name == b.name && opt(a.init, b.init);
  }
  bool node(const AssignStmt& a, const AssignStmt& b) const {
    return (*this)(a.target, b.target) && (*this)(a.value, b.value);
  }
  bool node(const ForeachStmt& a, const ForeachStmt& b) const {
    return a.var == b.var && (*this)(a.iterable, b.iterable) && list(a.body, b.body);
  }
  bool node(const IfStmt& a, const IfStmt& b) const {
    if (a.branches.size() != b.branches.size()) return false;
    for (std::size_t i = 0; i < a.branches.size(); ++i) {
      if (!(*this)(a.branches[i].condition, b.branches[i].condition) ||
          !list(a.branches[i].body, b.branches[i].body))
        return false;
    }
    if (a.else_body.has_value() != b.else_body.has_value()) return false;
    return !a.else_body || list(*a.else_body, *b.else_body);
  }
  bool node(const ReturnStmt& a, const ReturnStmt& b) const { return opt(a.value, b.value); }
  bool node(const ExprStmt& a, const ExprStmt& b) const { return (*this)(a.expr, b.expr); }
  bool node(const FunctionStmt& a, const FunctionStmt& b) const {
    return a.name == b.name && params(a.params, b.params) && list(a.body, b.body);
  }

  bool operator()(const ScreenItem& a, const ScreenItem& b) const {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          return node(x, std::get<T>(b.node));
        },
        a.node);
  }

  bool node(const Element& a, const Element& b) const {
    if (a.tag != b.tag || a.markup != b.markup || !list(a.contents, b.contents) ||
        !list(a.actions, b.actions) || !list(a.children, b.children) ||
        a.attributes.size() != b.attributes.size())
      return false;
    for (std::size_t i = 0; i < a.attributes.size(); ++i) {
      if (a.attributes[i].name != b.attributes[i].name ||
          !(*this)(a.attributes[i].value, b.attributes[i].value))
        return false;
    }
    return true;
  }
  bool node(const HeaderItem& a, const HeaderItem& b) const {
    return (*this)(a.title, b.title) && list(a.body, b.body);
  }
  bool node(const ImportItem& a, const ImportItem& b) const { return (*this)(a.target, b.target); }
  bool node(const HandlerItem& a, const HandlerItem& b) const { return list(a.items, b.items); }
  bool node(const RuleItem& a, const RuleItem& b) const {
    const Rule& x = a.rule;
    const Rule& y = b.rule;
    if (x.branches.size() != y.branches.size()) return false;
    for (std::size_t i = 0; i < x.branches.size(); ++i) {
      if (x.branches[i].context.trigger != y.branches[i].context.trigger ||
          !(*this)(x.branches[i].context.condition, y.branches[i].context.condition) ||
          !list(x.branches[i].adaptation, y.branches[i].adaptation))
        return false;
    }
    if (x.otherwise.has_value() != y.otherwise.has_value()) return false;
    return !x.otherwise || list(*x.otherwise, *y.otherwise);
  }
  bool node(const VarItem& a, const VarItem& b) const { return node(a.var, b.var); }
  bool node(const ForeachItem& a, const ForeachItem& b) const {
    return a.var == b.var && (*this)(a.iterable, b.iterable) && list(a.body, b.body);
  }
  bool node(const StmtItem& a, const StmtItem& b) const { return (*this)(a.stmt, b.stmt); }

  template <typename T>
  bool list(const std::vector<T>& a, const std::vector<T>& b) const {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(*this)(a[i], b[i])) return false;
    return true;
  }
  bool opt(const std::optional<Expr>& a, const std::optional<Expr>& b) const {
    if (a.has_value() != b.has_value()) return false;
    return !a || (*this)(*a, *b);
  }
  bool params(const std::vector<Param>& a, const std::vector<Param>& b) const {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].name != b[i].name || !(a[i].type == b[i].type)) return false;
    return true;
  }
};

}  // namespace

const EntityDecl* DslModule::find_entity(std::string_view n) const { return find_named(entities, n); }
const OperationDecl* DslModule::find_operation(std::string_view n) const { return find_named(operations, n); }
const ScreenDecl* DslModule::find_screen(std::string_view n) const { return find_named(screens, n); }
const WidgetDecl* DslModule::find_widget(std::string_view n) const { return find_named(widgets, n); }
const TouchDecl* DslModule::find_touch(std::string_view n) const { return find_named(touches, n); }
const GlobalVar* DslModule::find_variable(std::string_view n) const { return find_named(variables, n); }

SourceLocation DslModule::location_of(NodeId id) const {
  auto it = source_span_index.find(id);
  return it == source_span_index.end() ? SourceLocation{} : it->second;
}

bool structurally_equal(const DslModule& a, const DslModule& b) {
  Eq eq;
  if (a.name != b.name) return false;

  if (a.entities.size() != b.entities.size()) return false;
  for (std::size_t i = 0; i < a.entities.size(); ++i) {
    const auto& x = a.entities[i];
    const auto& y = b.entities[i];
    if (x.name != y.name || x.properties.size() != y.properties.size()) return false;
    for (std::size_t j = 0; j < x.properties.size(); ++j) {
      const auto& p = x.properties[j];
      const auto& q = y.properties[j];
      if (p.name != q.name || !(p.type == q.type) || p.enumeration != q.enumeration ||
          p.annotations != q.annotations || !eq.list(p.defaults, q.defaults))
        return false;
    }
  }

  if (a.operations.size() != b.operations.size()) return false;
  for (std::size_t i = 0; i < a.operations.size(); ++i) {
    const auto& x = a.operations[i];
    const auto& y = b.operations[i];
    if (x.name != y.name || x.async != y.async || !eq.params(x.params, y.params) ||
        !eq.list(x.body, y.body))
      return false;
  }

  if (a.screens.size() != b.screens.size()) return false;
  for (std::size_t i = 0; i < a.screens.size(); ++i) {
    const auto& x = a.screens[i];
    const auto& y = b.screens[i];
    if (x.name != y.name || x.cached_offline != y.cached_offline ||
        !eq.params(x.params, y.params) || !eq.list(x.items, y.items))
      return false;
  }

  auto same_widgets = [&](const std::vector<WidgetDecl>& u, const std::vector<WidgetDecl>& v) {
    if (u.size() != v.size()) return false;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i].kind != v[i].kind || u[i].name != v[i].name ||
          !eq.params(u[i].params, v[i].params) || !eq.list(u[i].body, v[i].body))
        return false;
    }
    return true;
  };
  if (!same_widgets(a.widgets, b.widgets) || !same_widgets(a.touches, b.touches)) return false;

  if (a.variables.size() != b.variables.size()) return false;
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    if (a.variables[i].name != b.variables[i].name ||
        !eq.opt(a.variables[i].init, b.variables[i].init))
      return false;
  }
  return true;
}

void for_each_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BinaryExpr>) {
          for_each_expr(*n.lhs, fn);
          for_each_expr(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          for_each_expr(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          for_each_expr(*n.callee, fn);
          for (const auto& a : n.args) for_each_expr(a, fn);
        } else if constexpr (std::is_same_v<T, MemberExpr>) {
          for_each_expr(*n.object, fn);
        } else if constexpr (std::is_same_v<T, BlockExpr>) {
          for (const auto& s : n.body) for_each_expr(s, fn);
        } else if constexpr (std::is_same_v<T, NewExpr>) {
          for (const auto& a : n.args) for_each_expr(a, fn);
        }
      },
      e.node);
}

void for_each_expr(const Stmt& s, const std::function<void(const Expr&)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarStmt>) {
          if (n.init) for_each_expr(*n.init, fn);
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          for_each_expr(n.target, fn);
          for_each_expr(n.value, fn);
        } else if constexpr (std::is_same_v<T, ForeachStmt>) {
          for_each_expr(n.iterable, fn);
          for (const auto& b : n.body) for_each_expr(b, fn);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          for (const auto& br : n.branches) {
            for_each_expr(br.condition, fn);
            for (const auto& b : br.body) for_each_expr(b, fn);
          }
          if (n.else_body)
            for (const auto& b : *n.else_body) for_each_expr(b, fn);
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          if (n.value) for_each_expr(*n.value, fn);
        } else if constexpr (std::is_same_v<T, ExprStmt>) {
          for_each_expr(n.expr, fn);
        } else if constexpr (std::is_same_v<T, FunctionStmt>) {
          for (const auto& b : n.body) for_each_expr(b, fn);
        }
      },
      s.node);
}

namespace {

void blocks_in(const Expr& e, const std::function<void(const Stmt&)>& fn);

void direct_exprs(const Stmt& s, const std::function<void(const Expr&)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarStmt>) {
          if (n.init) fn(*n.init);
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          fn(n.target);
          fn(n.value);
        } else if constexpr (std::is_same_v<T, ForeachStmt>) {
          fn(n.iterable);
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          for (const auto& br : n.branches) fn(br.condition);
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          if (n.value) fn(*n.value);
        } else if constexpr (std::is_same_v<T, ExprStmt>) {
          fn(n.expr);
        }
      },
      s.node);
}

// Visits the statements of block expressions nested in `e`, once each.
void blocks_in(const Expr& e, const std::function<void(const Stmt&)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BlockExpr>) {
          for_each_stmt(n.body, fn);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          blocks_in(*n.lhs, fn);
          blocks_in(*n.rhs, fn);
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          blocks_in(*n.operand, fn);
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          blocks_in(*n.callee, fn);
          for (const auto& a : n.args) blocks_in(a, fn);
        } else if constexpr (std::is_same_v<T, MemberExpr>) {
          blocks_in(*n.object, fn);
        } else if constexpr (std::is_same_v<T, NewExpr>) {
          for (const auto& a : n.args) blocks_in(a, fn);
        }
      },
      e.node);
}

}  // namespace

void for_each_stmt(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn) {
  for (const auto& s : body) {
    fn(s);
    direct_exprs(s, [&](const Expr& e) { blocks_in(e, fn); });
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ForeachStmt> || std::is_same_v<T, FunctionStmt>) {
            for_each_stmt(n.body, fn);
          } else if constexpr (std::is_same_v<T, IfStmt>) {
            for (const auto& br : n.branches) for_each_stmt(br.body, fn);
            if (n.else_body) for_each_stmt(*n.else_body, fn);
          }
        },
        s.node);
  }
}

}  // namespace muit::dsl
