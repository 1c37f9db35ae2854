#include "lower.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include "muit/dsl/parser.hpp"

namespace muit::codegen::detail {

using namespace muit::dsl;

namespace {

const std::map<std::string, WidgetLowering, std::less<>> kWidgets = {
    {"calendar", {"muit-calendar", "change", "<input type=\"date\" data-muit-control>"}},
    {"textInput", {"muit-text-input", "input", ""}},
    {"button", {"muit-button", "click", ""}},
    {"list", {"muit-list", "select", ""}},
    {"map", {"muit-map", "select", "<div class=\"muit-map-canvas\" data-muit-control></div>"}},
    {"weather", {"muit-weather", "refresh", "<div class=\"muit-weather-panel\" data-muit-control></div>"}},
};

const std::map<std::string, WidgetLowering, std::less<>> kTouches = {
    {"swipe", {"muit-touch", "swipe", ""}},
    {"tap", {"muit-touch", "tap", ""}},
    {"pinch", {"muit-touch", "pinch", ""}},
    {"press", {"muit-touch", "press", ""}},
};

std::string html_tag(const std::string& tag) {
  if (tag == "text") return "span";
  if (tag == "image") return "img";
  if (tag == "list") return "ul";
  if (tag == "item") return "li";
  if (tag == "link") return "a";
  return tag;
}

bool is_void_tag(const std::string& html) { return html == "input" || html == "img" || html == "br" || html == "hr"; }

bool is_valid_attr_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
  });
}

const LiteralExpr* literal(const Expr& e) { return std::get_if<LiteralExpr>(&e.node); }

std::string direction_of(const std::string& touch_name) {
  std::string n = touch_name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n.find("lefttoright") != std::string::npos) return "right";
  if (n.find("righttoleft") != std::string::npos) return "left";
  if (n.find("up") != std::string::npos) return "up";
  if (n.find("down") != std::string::npos) return "down";
  return "any";
}

class Lowerer {
 public:
  Lowerer(const DslModule& m, const ScreenDecl& s) : m_(m), s_(s), js_(m) {}

  LoweredScreen run() {
    js_.push_scope();
    for (const auto& p : s_.params) js_.declare(p.name);
    for (std::size_t i = 0; i < s_.items.size(); ++i) {
      const auto& it = s_.items[i];
      std::string id = s_.name + "__" + std::to_string(i);
      if (const auto* v = std::get_if<VarItem>(&it.node)) {
        out_.show += statements({Stmt{it.id, v->var}}, 2);
      } else if (const auto* st = std::get_if<StmtItem>(&it.node)) {
        out_.show += statements({st->stmt}, 2);
        collect_edges(st->stmt, "");
      } else {
        item(it, id, 1);
      }
    }
    js_.pop_scope();
    return std::move(out_);
  }

 private:
  void line(int depth, const std::string& text) {
    out_.body += std::string(static_cast<std::size_t>(depth) * 2, ' ') + text + "\n";
  }

  std::string scope_suffix() const {
    return foreach_.empty() ? std::string() : ", in: " + js_string(foreach_.back());
  }

  std::string statements(const std::vector<Stmt>& body, int indent) { return js_.stmts(body, indent); }

  std::string handler(const std::vector<Stmt>& body) {
    js_.push_scope();
    std::string code = statements(body, 5);
    js_.pop_scope();
    return "function (m, l, ev) {\n" + code + "        }";
  }

  std::string getter(const Expr& e) { return "function (m, l) { return " + js_.expr(e) + "; }"; }

  void reg(const std::string& body) { out_.registrations.push_back("{" + body + scope_suffix() + "}"); }

  std::vector<std::string> watched(const std::vector<const Expr*>& exprs) {
    std::set<std::string> out;
    for (const Expr* e : exprs) {
      for_each_expr(*e, [&](const Expr& x) {
        if (const auto* n = std::get_if<NameExpr>(&x.node)) {
          if (!js_.is_local(n->name) && m_.find_variable(n->name)) out.insert(n->name);
        } else if (const auto* mem = std::get_if<MemberExpr>(&x.node)) {
          if (const auto* obj = std::get_if<NameExpr>(&mem->object->node)) {
            if (!js_.is_local(obj->name) && m_.find_widget(obj->name)) out.insert(mem->member);
          }
        }
      });
    }
    return {out.begin(), out.end()};
  }

  BindingTarget target_of(const std::vector<Stmt>& body) {
    std::optional<BindingTarget> found;
    auto visit = [&](const Expr& e) {
      if (found) return;
      if (const auto* n = std::get_if<NewExpr>(&e.node)) {
        BindingTarget t{BindingTarget::Kind::Cascade, n->screen, {}};
        for (const auto& a : n->args) t.args.push_back(print(a));
        found = t;
      } else if (const auto* c = std::get_if<CallExpr>(&e.node)) {
        if (const auto* name = std::get_if<NameExpr>(&c->callee->node)) {
          if (!js_.is_local(name->name) && m_.find_operation(name->name)) {
            BindingTarget t{BindingTarget::Kind::Operation, name->name, {}};
            for (const auto& a : c->args) t.args.push_back(print(a));
            found = t;
          } else if (name->name == "navigate" && !c->args.empty()) {
            BindingTarget t{BindingTarget::Kind::Navigate, screen_name(c->args[0]), {}};
            for (std::size_t i = 1; i < c->args.size(); ++i) t.args.push_back(print(c->args[i]));
            found = t;
          }
        } else if (const auto* mem = std::get_if<MemberExpr>(&c->callee->node)) {
          const auto* ns = std::get_if<NameExpr>(&mem->object->node);
          if (ns && ns->name == "history" && !js_.is_local("history")) {
            BindingTarget t{BindingTarget::Kind::Back, "history." + mem->member, {}};
            for (const auto& a : c->args) t.args.push_back(print(a));
            found = t;
          }
        }
      }
    };
    // for_each_expr is pre-order, so the outermost call wins over its arguments.
    for (const auto& st : body) {
      if (!found) for_each_expr(st, visit);
    }
    if (!found) {
      for (const auto& st : body) {
        if (const auto* as = std::get_if<AssignStmt>(&st.node)) {
          found = BindingTarget{BindingTarget::Kind::Assign, print(as->target), {}};
          break;
        }
      }
    }
    return found.value_or(BindingTarget{});
  }

  std::string screen_name(const Expr& e) {
    if (const auto* lit = literal(e)) return lit->text;
    if (const auto* n = std::get_if<NameExpr>(&e.node)) return n->name;
    return {};
  }

  void collect_edges(const Stmt& s, const std::string& trigger) {
    for_each_expr(s, [&](const Expr& e) { edge_from(e, trigger); });
  }
  void collect_edges(const Expr& root, const std::string& trigger) {
    for_each_expr(root, [&](const Expr& e) { edge_from(e, trigger); });
  }

  void edge_from(const Expr& e, const std::string& trigger) {
    if (const auto* n = std::get_if<NewExpr>(&e.node)) {
      require_screen(n->screen);
      out_.edges.push_back({s_.name, n->screen, "cascade", trigger});
    } else if (const auto* c = std::get_if<CallExpr>(&e.node)) {
      if (const auto* name = std::get_if<NameExpr>(&c->callee->node)) {
        if (name->name == "navigate" && !c->args.empty() && !js_.is_local("navigate")) {
          const Expr& a = c->args[0];
          bool constant = literal(a) || (std::holds_alternative<NameExpr>(a.node) &&
                                         !js_.is_local(std::get<NameExpr>(a.node).name) &&
                                         !m_.find_variable(std::get<NameExpr>(a.node).name));
          if (constant) {
            std::string target = screen_name(a);
            require_screen(target);
            out_.edges.push_back({s_.name, target, "push", trigger});
          }
        } else if (m_.find_screen(name->name) && !js_.is_local(name->name)) {
          out_.edges.push_back({s_.name, name->name, "push", trigger});
        }
      } else if (const auto* mem = std::get_if<MemberExpr>(&c->callee->node)) {
        const auto* ns = std::get_if<NameExpr>(&mem->object->node);
        if (ns && ns->name == "history" && (mem->member == "go" || mem->member == "back")) {
          out_.edges.push_back({s_.name, "", "back", trigger});
        }
      }
    }
  }

  void require_screen(const std::string& name) {
    if (!m_.find_screen(name)) {
      throw CompileError(CompileErrc::UnknownScreen, "screen '" + s_.name + "' navigates to undeclared screen '" + name + "'");
    }
  }

  void event(const std::string& id, const std::string& ev, const std::vector<Stmt>& body,
             const std::vector<const Expr*>& reads) {
    reg("id: " + js_string(id) + ", event: " + js_string(ev) + ", run: " + handler(body));
    Binding b;
    b.screen = s_.name;
    b.element = id;
    b.event = ev;
    b.target = target_of(body);
    b.watched = watched(reads);
    out_.bindings.push_back(std::move(b));
    for (const auto& st : body) collect_edges(st, id);
  }

  void items(const std::vector<ScreenItem>& xs, const std::string& prefix, int depth) {
    for (std::size_t i = 0; i < xs.size(); ++i) item(xs[i], prefix + "_" + std::to_string(i), depth);
  }

  void item(const ScreenItem& it, const std::string& id, int depth) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Element>) {
            element(n, id, depth);
          } else if constexpr (std::is_same_v<T, HeaderItem>) {
            header(n, id, depth);
          } else if constexpr (std::is_same_v<T, ImportItem>) {
            import(n, id, depth);
          } else if constexpr (std::is_same_v<T, HandlerItem>) {
            line(depth, "<div id=\"" + id + "\" class=\"muit-handler\">");
            items(n.items, id, depth + 1);
            line(depth, "</div>");
          } else if constexpr (std::is_same_v<T, RuleItem>) {
            rule(n.rule, id, depth);
          } else if constexpr (std::is_same_v<T, VarItem>) {
            js_.declare(n.var.name);
            std::string init = n.var.init ? js_.expr(*n.var.init) : "null";
            reg("id: " + js_string(id) + ", init: function (m, l) { l.v_" + n.var.name + " = " + init + "; }");
          } else if constexpr (std::is_same_v<T, ForeachItem>) {
            std::string list = getter(n.iterable);
            reg("id: " + js_string(id) + ", foreach: " + list + ", as: " + js_string("v_" + n.var));
            line(depth, "<div id=\"" + id + "\" class=\"muit-foreach\">");
            line(depth + 1, "<template>");
            js_.push_scope();
            js_.declare(n.var);
            foreach_.push_back(id);
            items(n.body, id, depth + 2);
            foreach_.pop_back();
            js_.pop_scope();
            line(depth + 1, "</template>");
            line(depth, "</div>");
          } else {
            reg("id: " + js_string(id) + ", run: " + handler({n.stmt}));
            collect_edges(n.stmt, id);
          }
        },
        it.node);
  }

  void text_content(const Expr& e, const std::string& id, int depth, const std::string& tag) {
    if (const auto* lit = literal(e)) {
      line(depth, "<" + tag + " id=\"" + id + "\">" + html_escape(lit->text) + "</" + tag + ">");
      return;
    }
    if (const auto* n = std::get_if<NameExpr>(&e.node)) {
      if (!js_.is_local(n->name) && !m_.find_variable(n->name) && !m_.find_widget(n->name) &&
          (m_.find_screen(n->name) || m_.find_operation(n->name) || m_.find_entity(n->name))) {
        line(depth, "<" + tag + " id=\"" + id + "\">" + html_escape(n->name) + "</" + tag + ">");
        return;
      }
    }
    line(depth, "<" + tag + " id=\"" + id + "\" data-muit-text></" + tag + ">");
    reg("id: " + js_string(id) + ", text: " + getter(e));
  }

  void header(const HeaderItem& h, const std::string& id, int depth) {
    line(depth, "<header id=\"" + id + "\" class=\"muit-header\">");
    text_content(h.title, id + "_t", depth + 1, "h1");
    items(h.body, id, depth + 1);
    line(depth, "</header>");
  }

  void element(const Element& el, const std::string& id, int depth) {
    std::string tag = html_tag(el.tag);
    std::string open = "<" + tag + " id=\"" + id + "\"";
    std::vector<std::pair<std::string, const Expr*>> handlers;
    for (const auto& a : el.attributes) {
      const std::string& name = a.name;
      if (name.size() > 2 && name.rfind("on", 0) == 0 && std::isupper(static_cast<unsigned char>(name[2]))) {
        std::string ev = name.substr(2);
        std::transform(ev.begin(), ev.end(), ev.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        handlers.emplace_back(ev, &a.value);
        continue;
      }
      std::string html_name = name == "href" || name == "src" ? "data-muit-" + name : name;
      if (!is_valid_attr_name(html_name)) continue;
      if (const auto* lit = literal(a.value)) {
        if (lit->kind == LiteralExpr::Kind::Boolean) {
          if (lit->bool_value) open += " " + html_name;
        } else {
          open += " " + html_name + "=\"" + html_escape(lit->text) + "\"";
        }
        continue;
      }
      bool assignable = std::holds_alternative<NameExpr>(a.value.node) || std::holds_alternative<MemberExpr>(a.value.node);
      std::string r = "id: " + js_string(id) + ", attr: " + js_string(name) + ", get: " + getter(a.value);
      if (assignable && name == "value") {
        r += ", set: function (m, l, v) { " + js_.assign(a.value, "v") + " }";
      }
      reg(r);
    }
    open += ">";

    // A single literal label stays inline; everything else gets its own node.
    bool inline_text = el.contents.size() == 1 && literal(el.contents[0]) && el.children.empty();
    if (is_void_tag(tag)) {
      line(depth, open);
    } else if (inline_text) {
      line(depth, open + html_escape(literal(el.contents[0])->text) + "</" + tag + ">");
    } else {
      line(depth, open);
      for (std::size_t k = 0; k < el.contents.size(); ++k) {
        text_content(el.contents[k], id + "_c" + std::to_string(k), depth + 1, "span");
      }
      items(el.children, id, depth + 1);
      line(depth, "</" + tag + ">");
    }

    std::vector<const Expr*> reads;
    for (const auto& c : el.contents) reads.push_back(&c);
    if (!el.actions.empty()) {
      std::vector<const Expr*> r = reads;
      for (const auto& s : el.actions) for_each_expr(s, [&](const Expr& x) { r.push_back(&x); });
      event(id, "click", el.actions, r);
    }
    for (const auto& [ev, value] : handlers) {
      std::vector<Stmt> body;
      if (const auto* block = std::get_if<BlockExpr>(&value->node)) {
        body = block->body;
      } else {
        body.push_back(Stmt{0, ExprStmt{*value}});
      }
      std::vector<const Expr*> r;
      for (const auto& s : body) for_each_expr(s, [&](const Expr& x) { r.push_back(&x); });
      event(id, ev, body, r);
    }
  }

  // Widget and touch bodies: markup is rendered, statements become the
  // handler for the component's native event.
  void component(const WidgetDecl& w, const WidgetLowering& how, const std::vector<Expr>& args,
                 const std::string& id, int depth, bool touch) {
    std::string attrs = " class=\"" + std::string(touch ? "muit-touch" : "muit-widget ") + (touch ? "" : how.css_class) +
                        "\" data-" + (touch ? "touch" : "widget") + "=\"" + w.name + "\" data-kind=\"" + w.kind + "\"";
    if (touch) attrs += " data-direction=\"" + direction_of(w.name) + "\"";
    line(depth, "<div id=\"" + id + "\"" + attrs + ">");
    if (!how.control.empty()) line(depth + 1, how.control);

    js_.push_scope();
    std::vector<Stmt> body;
    for (std::size_t i = 0; i < w.params.size(); ++i) {
      js_.declare(w.params[i].name);
      Expr value = i < args.size() ? args[i] : Expr{0, LiteralExpr{LiteralExpr::Kind::String, "", 0, false}, {}};
      body.push_back(Stmt{0, VarStmt{w.params[i].name, value}});
    }
    std::vector<ScreenItem> markup;
    for (const auto& it : w.body) {
      if (const auto* v = std::get_if<VarItem>(&it.node)) {
        body.push_back(Stmt{it.id, v->var});
        js_.declare(v->var.name);
      } else if (const auto* st = std::get_if<StmtItem>(&it.node)) {
        body.push_back(st->stmt);
      } else {
        markup.push_back(it);
      }
    }
    items(markup, id, depth + 1);
    line(depth, "</div>");
    js_.pop_scope();

    bool has_effect = std::any_of(body.begin() + static_cast<long>(w.params.size()), body.end(),
                                  [](const Stmt& s) { return !std::holds_alternative<VarStmt>(s.node); });
    if (has_effect) {
      std::vector<const Expr*> reads;
      for (const auto& s : body) for_each_expr(s, [&](const Expr& x) { reads.push_back(&x); });
      js_.push_scope();
      for (const auto& p : w.params) js_.declare(p.name);
      event(id, how.event, body, reads);
      js_.pop_scope();
    }
  }

  void import(const ImportItem& imp, const std::string& id, int depth) {
    const Expr& t = imp.target;
    std::string name;
    std::vector<Expr> args;
    if (const auto* n = std::get_if<NameExpr>(&t.node)) {
      name = n->name;
    } else if (const auto* c = std::get_if<CallExpr>(&t.node)) {
      if (const auto* n2 = std::get_if<NameExpr>(&c->callee->node)) name = n2->name;
      args = c->args;
    }
    if (const auto* w = m_.find_widget(name)) {
      const auto* how = widget_lowering(w->kind);
      if (!how) throw CompileError(CompileErrc::UnknownWidgetKind, "no lowering for widget kind '" + w->kind + "'");
      component(*w, *how, args, id, depth, false);
    } else if (const auto* tc = m_.find_touch(name)) {
      const auto* how = touch_lowering(tc->kind);
      if (!how) throw CompileError(CompileErrc::UnknownWidgetKind, "no lowering for touch kind '" + tc->kind + "'");
      component(*tc, *how, args, id, depth, true);
    } else {
      throw CompileError(CompileErrc::UnknownWidgetKind, "import of unknown component '" + name + "'");
    }
  }

  void rule(const Rule& r, const std::string& id, int depth) {
    std::string fn = "function (m) {";
    for (std::size_t b = 0; b < r.branches.size(); ++b) {
      fn += " if (m.truthy(" + js_.expr(r.branches[b].context.condition) + ")) return " + std::to_string(b) + ";";
    }
    fn += " return " + std::to_string(r.otherwise ? static_cast<long>(r.branches.size()) : -1L) + "; }";
    reg("id: " + js_string(id) + ", rule: " + fn);
    line(depth, "<div id=\"" + id + "\" class=\"muit-rule\">");
    auto branch = [&](std::size_t b, const std::vector<ScreenItem>& xs) {
      line(depth + 1, "<template data-branch=\"" + std::to_string(b) + "\">");
      items(xs, id + "_" + std::to_string(b), depth + 2);
      line(depth + 1, "</template>");
    };
    for (std::size_t b = 0; b < r.branches.size(); ++b) branch(b, r.branches[b].adaptation);
    if (r.otherwise) branch(r.branches.size(), *r.otherwise);
    line(depth, "</div>");
  }

  const DslModule& m_;
  const ScreenDecl& s_;
  JsEmitter js_;
  LoweredScreen out_;
  std::vector<std::string> foreach_;
};

}  // namespace

const WidgetLowering* widget_lowering(std::string_view kind) {
  auto it = kWidgets.find(kind);
  return it == kWidgets.end() ? nullptr : &it->second;
}

const WidgetLowering* touch_lowering(std::string_view kind) {
  auto it = kTouches.find(kind);
  return it == kTouches.end() ? nullptr : &it->second;
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string> document_refs(std::string_view html, std::string_view base) {
  static const std::regex re(R"re(\s(?:src|href)="([^"]*)")re");
  std::vector<std::string> out;
  std::string doc(html);
  for (auto it = std::sregex_iterator(doc.begin(), doc.end(), re); it != std::sregex_iterator(); ++it) {
    std::string ref = (*it)[1].str();
    std::vector<std::string> parts;
    std::string dir(base);
    auto slash = dir.rfind('/');
    dir = slash == std::string::npos ? "" : dir.substr(0, slash);
    if (!dir.empty()) {
      std::size_t start = 0;
      while (start <= dir.size()) {
        auto end = dir.find('/', start);
        if (end == std::string::npos) end = dir.size();
        parts.push_back(dir.substr(start, end - start));
        start = end + 1;
      }
    }
    std::size_t start = 0;
    bool escaped = false;
    while (start <= ref.size()) {
      auto end = ref.find('/', start);
      if (end == std::string::npos) end = ref.size();
      std::string seg = ref.substr(start, end - start);
      if (seg == "..") {
        if (parts.empty()) escaped = true;
        else parts.pop_back();
      } else if (!seg.empty() && seg != ".") {
        parts.push_back(seg);
      }
      start = end + 1;
    }
    std::string path;
    for (const auto& p : parts) path += (path.empty() ? "" : "/") + p;
    out.push_back(escaped || ref.find("://") != std::string::npos || ref.rfind("//", 0) == 0 ? ref : path);
  }
  return out;
}

LoweredScreen lower_screen(const DslModule& module, const ScreenDecl& screen) { return Lowerer(module, screen).run(); }

}  // namespace muit::codegen::detail
