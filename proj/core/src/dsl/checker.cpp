#include "muit/dsl/checker.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>

namespace muit::dsl {

namespace {

using K = SemType::Kind;

constexpr std::array<std::string_view, 6> kWidgetKinds = {"calendar", "textInput", "button",
                                                          "list",     "map",       "weather"};
constexpr std::array<std::string_view, 4> kTouchKinds = {"swipe", "tap", "pinch", "press"};
constexpr std::array<std::string_view, 12> kContextVars = {
    "screen.deviceos",          "screen.devicetype",        "screen.window.innerWidth",
    "screen.window.innerHeight", "screen.device.orientation", "screen.device.model",
    "network.online",           "location.city",            "location.country",
    "location.latitude",        "location.longitude",       "location.region"};

// Builtin namespaces reachable by bare name.
constexpr std::array<std::string_view, 5> kNamespaces = {"screen", "history", "DateTime",
                                                         "network", "location"};
// Builtin free functions.
constexpr std::array<std::string_view, 6> kFunctions = {"exist", "navigate", "httpRequest",
                                                        "add",   "select",   "invoke"};

SemType ns(std::string n) { return SemType::named(K::Namespace, std::move(n)); }

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

struct Symbol {
  SemType type;
  bool assignable = true;
};

class Checker {
 public:
  explicit Checker(DslModule& m) : m_(m) {}

  Diagnostics run() {
    declarations();
    for (auto& v : m_.variables) {
      if (v.init) {
        v.sem = expr(*v.init);
        if (v.sem.is(K::Unknown)) v.sem = SemType::any();
      } else {
        v.sem = SemType::any();
      }
    }
    for (auto& e : m_.entities) entity(e);
    for (auto& op : m_.operations) operation(op);
    for (auto& w : m_.widgets) widget(w, false);
    for (auto& t : m_.touches) widget(t, true);
    for (auto& s : m_.screens) screen(s);
    if (first_remote_ && !m_.find_operation("import")) {
      warn(DiagCode::MissingImport, *first_remote_,
           "remote data is used but no 'import' operation is declared");
    }
    std::stable_sort(diags_.begin(), diags_.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return a.location.offset < b.location.offset;
    });
    return std::move(diags_);
  }

 private:
  // -- reporting -----------------------------------------------------------

  void error(DiagCode code, NodeId id, std::string msg) {
    diags_.push_back({Severity::Error, code, std::move(msg), m_.location_of(id)});
  }
  void warn(DiagCode code, NodeId id, std::string msg) {
    diags_.push_back({Severity::Warning, code, std::move(msg), m_.location_of(id)});
  }

  // -- declarations --------------------------------------------------------

  template <typename T>
  void unique(const std::vector<T>& decls, std::string_view what) {
    std::set<std::string> seen;
    for (const auto& d : decls) {
      if (!seen.insert(d.name).second) {
        error(DiagCode::DuplicateDeclaration, d.id,
              "duplicate " + std::string(what) + " " + quoted(d.name));
      }
    }
  }

  void declarations() {
    unique(m_.entities, "entity");
    unique(m_.operations, "operation");
    unique(m_.screens, "screen");
    unique(m_.widgets, "widget");
    unique(m_.touches, "touch");
    unique(m_.variables, "variable");
    for (auto& op : m_.operations) {
      bool returns_value = false;
      for_each_stmt(op.body, [&](const Stmt& s) {
        if (const auto* r = std::get_if<ReturnStmt>(&s.node); r && r->value) returns_value = true;
      });
      op.return_type = returns_value ? SemType::any() : SemType::void_type();
    }
  }

  SemType type_of(const TypeRef& ref, NodeId at) {
    if (ref.empty()) return SemType::any();
    SemType t = resolve_type(ref, m_);
    if (t.is(K::Unknown)) {
      error(DiagCode::UnresolvedType, at, "unresolved type " + quoted(ref.name));
      return SemType::any();
    }
    return t;
  }

  void params(std::vector<Param>& ps) {
    std::set<std::string> seen;
    for (auto& p : ps) {
      if (!seen.insert(p.name).second)
        error(DiagCode::DuplicateDeclaration, p.id, "duplicate parameter " + quoted(p.name));
      p.sem = type_of(p.type, p.id);
      declare(p.name, p.sem);
    }
  }

  void entity(EntityDecl& e) {
    std::set<std::string> seen;
    for (auto& p : e.properties) {
      if (!seen.insert(p.name).second) {
        error(DiagCode::DuplicateDeclaration, p.id,
              "duplicate property " + quoted(p.name) + " in entity " + quoted(e.name));
      }
      for (auto& d : p.defaults) expr(d);
      if (p.type.empty()) {
        SemType elem = p.defaults.empty() ? SemType::any() : p.defaults.front().type;
        p.sem = (p.defaults.size() > 1 && !p.enumeration) ? SemType::list(elem) : elem;
        continue;
      }
      p.sem = type_of(p.type, p.id);
      SemType slot = p.sem.is(K::List) && p.sem.element ? *p.sem.element : p.sem;
      for (const auto& d : p.defaults) {
        if (!assignable_to(d.type, slot)) {
          error(DiagCode::TypeMismatch, d.id,
                "default for " + quoted(p.name) + " must be " + slot.to_string() + ", found " +
                    d.type.to_string());
        }
      }
    }
  }

  void operation(OperationDecl& op) {
    push();
    params(op.params);
    if (op.async) {
      std::size_t callbacks = std::count_if(op.params.begin(), op.params.end(),
                                            [](const Param& p) { return p.sem.is(K::Callback); });
      if (callbacks != 1) {
        error(DiagCode::AsyncCallback, op.id,
              "async operation " + quoted(op.name) + " must declare exactly one callback parameter");
      }
    }
    ++in_operation_;
    if (op.name == "import") ++in_import_op_;
    block(op.body);
    if (op.name == "import") --in_import_op_;
    --in_operation_;
    pop();
  }

  void widget(WidgetDecl& w, bool touch) {
    bool known = touch ? is_touch_kind(w.kind) : is_widget_kind(w.kind);
    if (!known) {
      error(touch ? DiagCode::UnknownTouchKind : DiagCode::UnknownWidgetKind, w.id,
            std::string(touch ? "unknown touch kind " : "unknown widget kind ") + quoted(w.kind));
    }
    push();
    params(w.params);
    items(w.body);
    pop();
  }

  void screen(ScreenDecl& s) {
    push();
    params(s.params);
    int headers = 0;
    for (const auto& it : s.items) {
      if (std::holds_alternative<HeaderItem>(it.node) && ++headers == 2) {
        error(DiagCode::MultipleHeaders, it.id, "screen " + quoted(s.name) + " has more than one header");
      }
    }
    items(s.items);
    pop();
  }

  // -- scopes --------------------------------------------------------------

  void push() { scopes_.emplace_back(); }
  void pop() { scopes_.pop_back(); }
  void declare(const std::string& name, SemType t, bool assignable = true) {
    if (!scopes_.empty()) scopes_.back()[name] = Symbol{std::move(t), assignable};
  }

  std::optional<Symbol> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    if (const auto* v = m_.find_variable(name)) return Symbol{v->sem.is(K::Unknown) ? SemType::any() : v->sem, true};
    if (m_.find_operation(name)) return Symbol{SemType::named(K::Operation, name), false};
    if (m_.find_screen(name)) return Symbol{SemType::named(K::Screen, name), false};
    if (m_.find_widget(name)) return Symbol{SemType::named(K::Widget, name), false};
    if (m_.find_touch(name)) return Symbol{SemType::named(K::Touch, name), false};
    if (m_.find_entity(name)) return Symbol{ns(name), false};
    if (std::find(kNamespaces.begin(), kNamespaces.end(), name) != kNamespaces.end())
      return Symbol{ns(name), false};
    if (std::find(kFunctions.begin(), kFunctions.end(), name) != kFunctions.end())
      return Symbol{SemType::named(K::Function, name), false};
    if (name == "option") return Symbol{SemType::any(), false};
    return std::nullopt;
  }

  // -- items ---------------------------------------------------------------

  void items(std::vector<ScreenItem>& list) {
    for (auto& it : list) item(it);
  }

  void nested_items(std::vector<ScreenItem>& list) {
    push();
    items(list);
    pop();
  }

  void item(ScreenItem& it) {
    std::visit([&](auto& n) { item_node(n, it.id); }, it.node);
  }

  void item_node(Element& el, NodeId) {
    for (auto& c : el.contents) expr(c);
    for (auto& a : el.attributes) expr(a.value);
    if (!el.actions.empty()) {
      push();
      block_in_scope(el.actions);
      pop();
    }
    nested_items(el.children);
  }

  void item_node(HeaderItem& h, NodeId) {
    expr(h.title);
    nested_items(h.body);
  }

  void item_node(ImportItem& imp, NodeId) {
    Expr* target = &imp.target;
    if (auto* call = std::get_if<CallExpr>(&imp.target.node)) target = &*call->callee;
    const auto* name = std::get_if<NameExpr>(&target->node);
    if (name && !m_.find_widget(name->name) && !m_.find_touch(name->name) && !lookup(name->name)) {
      error(DiagCode::UnresolvedWidget, target->id, "unresolved widget " + quoted(name->name));
      imp.target.type = SemType::unknown();
      return;
    }
    SemType t = expr(imp.target);
    if (!t.is(K::Widget) && !t.is(K::Touch) && !t.is(K::Unknown)) {
      error(DiagCode::TypeMismatch, imp.target.id,
            "import target must be a widget or touch, found " + t.to_string());
    }
  }

  void item_node(HandlerItem& h, NodeId) { nested_items(h.items); }

  void item_node(RuleItem& r, NodeId) {
    for (auto& b : r.rule.branches) {
      context(b.context);
      nested_items(b.adaptation);
    }
    if (r.rule.otherwise) nested_items(*r.rule.otherwise);
  }

  void item_node(VarItem& v, NodeId id) { var(v.var, id); }

  void item_node(ForeachItem& f, NodeId) {
    SemType elem = iterate(f.iterable);
    push();
    declare(f.var, elem);
    items(f.body);
    pop();
  }

  void item_node(StmtItem& s, NodeId) { stmt(s.stmt); }

  void context(Context& c) {
    SemType t = expr(c.condition);
    require_boolean(c.condition, t);
    for_each_expr(c.condition, [&](const Expr& e) {
      const auto* n = std::get_if<NameExpr>(&e.node);
      if (!n) {
        if (std::holds_alternative<CallExpr>(e.node) || std::holds_alternative<BlockExpr>(e.node) ||
            std::holds_alternative<NewExpr>(e.node)) {
          error(DiagCode::InvalidContext, e.id, "context conditions may not call functions");
        }
        return;
      }
      if (n->name != "screen" && n->name != "network" && n->name != "location") {
        error(DiagCode::InvalidContext, e.id,
              "context condition may only reference context variables, found " + quoted(n->name));
      }
    });
  }

  // -- statements ----------------------------------------------------------

  void block(std::vector<Stmt>& body) {
    push();
    block_in_scope(body);
    pop();
  }

  void block_in_scope(std::vector<Stmt>& body) {
    // Local functions are visible throughout their block.
    for (auto& s : body) {
      if (auto* f = std::get_if<FunctionStmt>(&s.node)) declare(f->name, SemType::named(K::Function, f->name), false);
    }
    for (auto& s : body) stmt(s);
  }

  void var(VarStmt& v, NodeId) {
    SemType t = v.init ? expr(*v.init) : SemType::any();
    if (t.is(K::Unknown) || t.is(K::Void)) t = SemType::any();
    declare(v.name, t);
  }

  void stmt(Stmt& s) {
    std::visit([&](auto& n) { stmt_node(n, s.id); }, s.node);
  }

  void stmt_node(VarStmt& v, NodeId id) { var(v, id); }

  void stmt_node(AssignStmt& a, NodeId id) {
    SemType target = expr(a.target);
    const bool member_target = assignable_member_;
    SemType value = expr(a.value);
    bool ok_target = false;
    if (const auto* n = std::get_if<NameExpr>(&a.target.node)) {
      auto sym = lookup(n->name);
      ok_target = sym && sym->assignable;
    } else if (std::holds_alternative<MemberExpr>(a.target.node)) {
      ok_target = member_target;
    }
    if (!ok_target) {
      if (!target.is(K::Unknown)) error(DiagCode::NotAssignable, a.target.id, "left side of '=' is not assignable");
      return;
    }
    if (!assignable_to(value, target)) {
      error(DiagCode::TypeMismatch, id,
            "cannot assign " + value.to_string() + " to " + target.to_string());
    }
  }

  void stmt_node(ForeachStmt& f, NodeId) {
    SemType elem = iterate(f.iterable);
    push();
    declare(f.var, elem);
    block_in_scope(f.body);
    pop();
  }

  void stmt_node(IfStmt& s, NodeId) {
    for (auto& b : s.branches) {
      require_boolean(b.condition, expr(b.condition));
      block(b.body);
    }
    if (s.else_body) block(*s.else_body);
  }

  void stmt_node(ReturnStmt& r, NodeId id) {
    if (r.value) expr(*r.value);
    if (in_operation_ == 0 && in_function_ == 0) {
      error(DiagCode::ReturnOutsideOperation, id, "'return' outside an operation or function");
    }
  }

  void stmt_node(ExprStmt& e, NodeId) { expr(e.expr); }

  void stmt_node(FunctionStmt& f, NodeId) {
    push();
    params(f.params);
    ++in_function_;
    block_in_scope(f.body);
    --in_function_;
    pop();
  }

  void require_boolean(const Expr& e, const SemType& t) {
    if (!t.is_dynamic() && !t.is(K::Boolean)) {
      error(DiagCode::NotBoolean, e.id, "condition must be boolean, found " + t.to_string());
    }
  }

  SemType iterate(Expr& e) {
    SemType t = expr(e);
    if (t.is(K::List)) return t.element ? *t.element : SemType::any();
    if (!t.is_dynamic()) {
      error(DiagCode::NotIterable, e.id, "foreach needs a list, found " + t.to_string());
    }
    return SemType::any();
  }

  // -- expressions ---------------------------------------------------------

  SemType expr(Expr& e) {
    assignable_member_ = false;
    e.type = std::visit([&](auto& n) { return node(n, e); }, e.node);
    return e.type;
  }

  SemType node(LiteralExpr& l, Expr&) {
    switch (l.kind) {
      case LiteralExpr::Kind::String: return SemType::string();
      case LiteralExpr::Kind::Int: return SemType::integer();
      case LiteralExpr::Kind::DateTime: return SemType::date_time();
      case LiteralExpr::Kind::Boolean: return SemType::boolean();
    }
    return SemType::unknown();
  }

  SemType node(NameExpr& n, Expr& e) {
    auto sym = lookup(n.name);
    if (!sym) {
      error(DiagCode::UnresolvedName, e.id, "unresolved name " + quoted(n.name));
      return SemType::unknown();
    }
    return sym->type;
  }

  SemType node(BinaryExpr& b, Expr& e) {
    SemType l = expr(*b.lhs);
    SemType r = expr(*b.rhs);
    if (l.is(K::Unknown) || r.is(K::Unknown)) {
      // Operand errors were already reported.
      return SemType::unknown();
    }
    SemType t = binary_result(b.op, l, r);
    if (t.is(K::Unknown)) {
      error(DiagCode::OperatorUndefined, e.id,
            "operator " + std::string(to_string(b.op)) + " undefined for " + l.to_string() + "," +
                r.to_string());
    }
    return t;
  }

  SemType node(UnaryExpr& u, Expr& e) {
    SemType t = expr(*u.operand);
    if (t.is(K::Unknown)) return t;
    if (u.op == UnaryOp::Not) {
      if (t.is_dynamic() || t.is(K::Boolean)) return SemType::boolean();
    } else {
      if (t.is(K::Any)) return SemType::any();
      if (t.is(K::Int)) return SemType::integer();
    }
    error(DiagCode::OperatorUndefined, e.id,
          "operator " + std::string(to_string(u.op)) + " undefined for " + t.to_string());
    return SemType::unknown();
  }

  SemType node(MemberExpr& m, Expr& e) {
    SemType obj = expr(*m.object);
    SemType t = member(obj, m.member, e);
    return t;
  }

  // Sets assignable_member_ for property and dynamic accesses.
  SemType member(const SemType& obj, const std::string& name, Expr& e) {
    auto unknown_member = [&]() {
      error(DiagCode::UnknownMember, e.id,
            obj.to_string() + " has no member " + quoted(name));
      return SemType::unknown();
    };
    switch (obj.kind) {
      case K::Unknown:
        return SemType::unknown();
      case K::Any:
        assignable_member_ = true;
        return SemType::any();
      case K::Entity: {
        const auto* ent = m_.find_entity(obj.name);
        if (!ent) return SemType::any();
        for (const auto& p : ent->properties) {
          if (p.name == name) {
            assignable_member_ = true;
            return p.sem.is(K::Unknown) ? SemType::any() : p.sem;
          }
        }
        return unknown_member();
      }
      case K::DateTime:
        if (name == "getYear" || name == "getMonth" || name == "getDate" || name == "getHours" ||
            name == "getMinutes" || name == "getDay")
          return SemType::named(K::Function, "DateTime." + name);
        return unknown_member();
      case K::String:
        if (name == "length") return SemType::integer();
        if (name == "toLowerCase" || name == "toUpperCase" || name == "trim")
          return SemType::named(K::Function, "String." + name);
        return unknown_member();
      case K::List:
        if (name == "length") return SemType::integer();
        return unknown_member();
      case K::Widget:
      case K::Touch: {
        const auto* w = obj.is(K::Widget) ? m_.find_widget(obj.name) : m_.find_touch(obj.name);
        if (!w) return SemType::any();
        auto members = widget_members(*w);
        if (std::find(members.begin(), members.end(), name) == members.end()) return unknown_member();
        if (const auto* g = m_.find_variable(name)) return g->sem.is(K::Unknown) ? SemType::any() : g->sem;
        return SemType::any();
      }
      case K::Namespace:
        return namespace_member(obj.name, name, e, unknown_member);
      default:
        return unknown_member();
    }
  }

  template <typename F>
  SemType namespace_member(const std::string& space, const std::string& name, Expr&, F&& unknown_member) {
    auto fn = [&](std::string n) { return SemType::named(K::Function, std::move(n)); };
    if (space == "screen") {
      if (name == "deviceos" || name == "devicetype") return SemType::string();
      if (name == "window") return ns("screen.window");
      if (name == "device") return ns("screen.device");
    } else if (space == "screen.window") {
      if (name == "innerWidth" || name == "innerHeight") return SemType::integer();
    } else if (space == "screen.device") {
      if (name == "orientation" || name == "model") return SemType::string();
    } else if (space == "network") {
      if (name == "online") return SemType::boolean();
    } else if (space == "location") {
      if (name == "city" || name == "country" || name == "region") return SemType::string();
      if (name == "latitude" || name == "longitude") return SemType::any();
    } else if (space == "history") {
      if (name == "go" || name == "back") return fn("history." + name);
    } else if (space == "DateTime") {
      if (name == "create" || name == "now") return fn("DateTime." + name);
    } else if (m_.find_entity(space)) {
      if (name == "fromTaskList" || name == "create") return fn("entity." + name + ":" + space);
    }
    return unknown_member();
  }

  SemType node(BlockExpr& b, Expr&) {
    block(b.body);
    return SemType::of(K::Block);
  }

  SemType node(NewExpr& n, Expr& e) {
    std::vector<SemType> args;
    for (auto& a : n.args) args.push_back(expr(a));
    const auto* s = m_.find_screen(n.screen);
    if (!s) {
      error(DiagCode::UnknownScreen, e.id, "unknown screen " + quoted(n.screen));
      return SemType::unknown();
    }
    check_args(n.args, args, s->params, "screen " + quoted(n.screen), e);
    return SemType::named(K::Screen, n.screen);
  }

  void check_args(const std::vector<Expr>& exprs, const std::vector<SemType>& args,
                  const std::vector<Param>& params, const std::string& what, const Expr& call) {
    if (args.size() != params.size()) {
      error(DiagCode::ArityMismatch, call.id,
            what + " expects " + std::to_string(params.size()) + " argument(s), got " +
                std::to_string(args.size()));
      return;
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      SemType want = params[i].sem;
      if (want.is(K::Unknown)) want = resolve_type(params[i].type, m_);
      if (params[i].type.empty() || want.is(K::Unknown)) continue;
      if (!assignable_to(args[i], want) && !(want.is(K::Entity) && args[i].is(K::String)) &&
          !(want.is(K::Callback) && (args[i].is(K::Function) || args[i].is(K::Operation) || args[i].is(K::Block)))) {
        error(DiagCode::TypeMismatch, exprs[i].id,
              "argument " + std::to_string(i + 1) + " of " + what + " must be " + want.to_string() +
                  ", found " + args[i].to_string());
      }
    }
  }

  void arity(const Expr& call, std::size_t got, std::size_t min, std::size_t max, const std::string& what) {
    if (got < min || got > max) {
      std::string want = min == max ? std::to_string(min)
                                    : std::to_string(min) + ".." + std::to_string(max);
      error(DiagCode::ArityMismatch, call.id,
            what + " expects " + want + " argument(s), got " + std::to_string(got));
    }
  }

  void want_arg(const Expr& a, const SemType& got, K want, const std::string& what) {
    if (!got.is_dynamic() && !got.is(want)) {
      error(DiagCode::TypeMismatch, a.id,
            what + " needs " + SemType::of(want).to_string() + ", found " + got.to_string());
    }
  }

  SemType node(CallExpr& c, Expr& e) {
    SemType callee = expr(*c.callee);
    std::vector<SemType> args;
    for (auto& a : c.args) args.push_back(expr(a));
    switch (callee.kind) {
      case K::Unknown:
        return SemType::unknown();
      case K::Any:
        return SemType::any();
      case K::Operation: {
        const auto* op = m_.find_operation(callee.name);
        check_args(c.args, args, op->params, "operation " + quoted(op->name), e);
        if (op->return_type.is(K::Void)) return SemType::void_type();
        return SemType::any();
      }
      case K::Widget:
      case K::Touch: {
        const auto* w = callee.is(K::Widget) ? m_.find_widget(callee.name) : m_.find_touch(callee.name);
        check_args(c.args, args, w->params, quoted(w->name), e);
        return callee;
      }
      case K::Screen: {
        const auto* s = m_.find_screen(callee.name);
        check_args(c.args, args, s->params, "screen " + quoted(s->name), e);
        return callee;
      }
      case K::Callback:
        return SemType::any();
      case K::Function:
        return builtin_call(callee.name, c, args, e);
      default:
        error(DiagCode::NotCallable, c.callee->id, callee.to_string() + " is not callable");
        return SemType::unknown();
    }
  }

  void note_remote(const Expr& e) {
    if (!first_remote_ && in_import_op_ == 0) first_remote_ = e.id;
  }

  SemType builtin_call(const std::string& name, CallExpr& c, const std::vector<SemType>& args, Expr& e) {
    const std::size_t n = args.size();
    if (name == "exist") {
      arity(e, n, 1, 1, "exist");
      return SemType::boolean();
    }
    if (name == "navigate") {
      arity(e, n, 1, 16, "navigate");
      if (n >= 1) {
        const SemType& t = args[0];
        if (t.is(K::String)) {
          const auto* lit = std::get_if<LiteralExpr>(&c.args[0].node);
          if (lit && !m_.find_screen(lit->text))
            error(DiagCode::UnknownScreen, c.args[0].id, "unknown screen " + quoted(lit->text));
        } else if (!t.is_dynamic() && !t.is(K::Screen)) {
          error(DiagCode::TypeMismatch, c.args[0].id, "navigate needs a screen, found " + t.to_string());
        }
      }
      return SemType::void_type();
    }
    if (name == "httpRequest") {
      arity(e, n, 1, 2, "httpRequest");
      if (n >= 1) want_arg(c.args[0], args[0], K::String, "httpRequest");
      note_remote(e);
      return SemType::any();
    }
    if (name == "invoke") {
      arity(e, n, 1, 16, "invoke");
      if (n >= 1) want_arg(c.args[0], args[0], K::String, "invoke");
      note_remote(e);
      return SemType::any();
    }
    if (name == "add") {
      arity(e, n, 1, 1, "add");
      return SemType::void_type();
    }
    if (name == "select") {
      arity(e, n, 1, 1, "select");
      return SemType::any();
    }
    if (name == "history.go" || name == "history.back") {
      arity(e, n, 0, 1, name);
      if (n == 1) want_arg(c.args[0], args[0], K::Int, name);
      return SemType::void_type();
    }
    if (name == "DateTime.create") {
      arity(e, n, 1, 6, name);
      for (std::size_t i = 0; i < n; ++i) want_arg(c.args[i], args[i], K::Int, name);
      return SemType::date_time();
    }
    if (name == "DateTime.now") {
      arity(e, n, 0, 0, name);
      return SemType::date_time();
    }
    if (name.rfind("DateTime.get", 0) == 0) {
      arity(e, n, 0, 0, name);
      return SemType::integer();
    }
    if (name.rfind("String.", 0) == 0) {
      arity(e, n, 0, 0, name);
      return SemType::string();
    }
    if (name.rfind("entity.", 0) == 0) {
      std::string entity = name.substr(name.find(':') + 1);
      if (name.rfind("entity.fromTaskList", 0) == 0) {
        arity(e, n, 1, 1, entity + ".fromTaskList");
      } else {
        arity(e, n, 0, 0, entity + ".create");
      }
      return SemType::entity(entity);
    }
    // Local helper functions are untyped.
    return SemType::any();
  }

  DslModule& m_;
  Diagnostics diags_;
  std::vector<std::map<std::string, Symbol>> scopes_;
  int in_operation_ = 0;
  int in_function_ = 0;
  int in_import_op_ = 0;
  bool assignable_member_ = false;
  std::optional<NodeId> first_remote_;

};

}  // namespace

std::span<const std::string_view> widget_kinds() { return kWidgetKinds; }
std::span<const std::string_view> touch_kinds() { return kTouchKinds; }
std::span<const std::string_view> context_variables() { return kContextVars; }

bool is_widget_kind(std::string_view kind) {
  return std::find(kWidgetKinds.begin(), kWidgetKinds.end(), kind) != kWidgetKinds.end();
}
bool is_touch_kind(std::string_view kind) {
  return std::find(kTouchKinds.begin(), kTouchKinds.end(), kind) != kTouchKinds.end();
}

SemType resolve_type(const TypeRef& ref, const DslModule& module) {
  const std::string& n = ref.name;
  if (n == "List" || n == "list") {
    if (ref.args.size() != 1) return SemType::list(SemType::any());
    SemType elem = resolve_type(ref.args[0], module);
    return elem.is(K::Unknown) ? SemType::unknown() : SemType::list(elem);
  }
  if (n == "String" || n == "string") return SemType::string();
  if (n == "int" || n == "Int" || n == "long" || n == "Long" || n == "number") return SemType::integer();
  if (n == "boolean" || n == "Boolean" || n == "bool") return SemType::boolean();
  if (n == "DateTime" || n == "Date" || n == "date") return SemType::date_time();
  if (n == "callback" || n == "Callback") return SemType::of(K::Callback);
  if (n == "Any" || n == "any" || n == "var") return SemType::any();
  if (n == "Screen" || n == "screen") return SemType::of(K::Screen);
  // Entity references; type arguments such as `Role<manager>` are
  // annotations and do not change the type.
  if (module.find_entity(n)) return SemType::entity(n);
  return SemType::unknown();
}

SemType binary_result(BinaryOp op, const SemType& l, const SemType& r) {
  const bool ld = l.is_dynamic();
  const bool rd = r.is_dynamic();
  auto one_of = [](const SemType& t, std::initializer_list<K> ks) {
    return t.is_dynamic() || std::find(ks.begin(), ks.end(), t.kind) != ks.end();
  };
  switch (op) {
    case BinaryOp::Add:
      if (l.is(K::Int) && r.is(K::Int)) return SemType::integer();
      if ((l.is(K::String) && (r.is(K::String) || r.is(K::Int))) || (l.is(K::Int) && r.is(K::String)))
        return SemType::string();
      if (ld || rd) {
        const SemType& other = ld ? r : l;
        if (other.is(K::String)) return SemType::string();
        if (other.is_dynamic() || other.is(K::Int)) return SemType::any();
      }
      return SemType::unknown();
    case BinaryOp::Sub:
    case BinaryOp::Mul:
    case BinaryOp::Mod:
      if (one_of(l, {K::Int}) && one_of(r, {K::Int}))
        return (ld || rd) ? (ld && rd ? SemType::any() : SemType::integer()) : SemType::integer();
      return SemType::unknown();
    case BinaryOp::Less:
    case BinaryOp::Greater:
    case BinaryOp::LessEq:
    case BinaryOp::GreaterEq:
      if (ld || rd) {
        const SemType& other = ld ? r : l;
        return one_of(other, {K::Int, K::DateTime, K::String}) ? SemType::boolean() : SemType::unknown();
      }
      if (l.kind == r.kind && (l.is(K::Int) || l.is(K::DateTime) || l.is(K::String))) return SemType::boolean();
      return SemType::unknown();
    case BinaryOp::Eq:
    case BinaryOp::NotEq:
      if (ld || rd || l == r) return SemType::boolean();
      return SemType::unknown();
    case BinaryOp::And:
    case BinaryOp::Or:
      if (one_of(l, {K::Boolean}) && one_of(r, {K::Boolean})) return SemType::boolean();
      return SemType::unknown();
    case BinaryOp::In:
      if (rd) return SemType::boolean();
      if (!r.is(K::List)) return SemType::unknown();
      if (ld || l.is(K::String)) return SemType::boolean();
      if (r.element && assignable_to(l, *r.element)) return SemType::boolean();
      return SemType::unknown();
  }
  return SemType::unknown();
}

bool assignable_to(const SemType& value, const SemType& target) {
  if (value.is_dynamic() || target.is_dynamic()) return true;
  if (target.is(K::List) && value.is(K::List)) {
    if (!target.element || !value.element) return true;
    return assignable_to(*value.element, *target.element);
  }
  if (target.is(K::Screen) && value.is(K::Screen)) return target.name.empty() || target.name == value.name;
  return value == target;
}

std::vector<std::string> widget_members(const WidgetDecl& widget) {
  std::vector<std::string> out;
  auto add = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  std::function<void(const std::vector<ScreenItem>&)> walk = [&](const std::vector<ScreenItem>& items) {
    for (const auto& it : items) {
      std::visit(
          [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, StmtItem>) {
              for_each_stmt(std::vector<Stmt>{n.stmt}, [&](const Stmt& s) {
                if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
                  if (const auto* name = std::get_if<NameExpr>(&a->target.node)) add(name->name);
                }
              });
            } else if constexpr (std::is_same_v<T, VarItem>) {
              add(n.var.name);
            } else if constexpr (std::is_same_v<T, Element>) {
              for (const auto& a : n.attributes) {
                if (a.name.rfind("on", 0) == 0) continue;
                if (const auto* name = std::get_if<NameExpr>(&a.value.node)) add(name->name);
              }
              walk(n.children);
            } else if constexpr (std::is_same_v<T, HeaderItem>) {
              walk(n.body);
            } else if constexpr (std::is_same_v<T, HandlerItem>) {
              walk(n.items);
            } else if constexpr (std::is_same_v<T, ForeachItem>) {
              walk(n.body);
            } else if constexpr (std::is_same_v<T, RuleItem>) {
              for (const auto& b : n.rule.branches) walk(b.adaptation);
              if (n.rule.otherwise) walk(*n.rule.otherwise);
            }
          },
          it.node);
    }
  };
  walk(widget.body);
  return out;
}

Diagnostics check(DslModule& module) { return Checker(module).run(); }

}  // namespace muit::dsl
