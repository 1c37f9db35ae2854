#include "muit/codegen/bundle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "js.hpp"
#include "lower.hpp"
#include "muit/dsl/checker.hpp"
#include "muit/dsl/evaluator.hpp"

namespace muit::codegen {

using namespace muit::dsl;
using detail::js_string;

std::string_view runtime_script_impl();
std::string_view base_stylesheet();
std::string platform_stylesheet(std::string_view platform);

namespace {

std::string document_path(const std::string& screen) { return "screens/" + screen + ".html"; }

std::string screen_document(const std::string& module, const ScreenDecl& s, const detail::LoweredScreen& low,
                            const std::vector<std::string>& platforms) {
  std::string doc = "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  doc += "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n";
  doc += "<title>" + detail::html_escape(s.name) + "</title>\n";
  doc += "<link rel=\"stylesheet\" href=\"../styles/base.css\">\n";
  for (const auto& p : platforms) {
    doc += "<link rel=\"stylesheet\" href=\"../styles/" + p + ".css\" data-platform=\"" + p + "\" disabled>\n";
  }
  doc += "<script src=\"../assets/runtime.js\"></script>\n<script src=\"../app.js\"></script>\n</head>\n";
  doc += "<body data-module=\"" + detail::html_escape(module) + "\" data-screen=\"" + detail::html_escape(s.name) + "\">\n";
  doc += low.body;
  doc += "</body>\n</html>\n";
  return doc;
}

std::string operation_js(const DslModule& m, const OperationDecl& op) {
  detail::JsEmitter js(m);
  js.push_scope();
  std::string params = "[";
  std::string types = "[";
  std::string binds;
  for (std::size_t i = 0; i < op.params.size(); ++i) {
    const auto& p = op.params[i];
    js.declare(p.name);
    params += (i ? ", " : "") + js_string(p.name);
    types += (i ? ", " : "") + js_string(p.type.name);
    binds += "        l.v_" + p.name + " = a.length > " + std::to_string(i) + " ? a[" + std::to_string(i) + "] : null;\n";
  }
  std::string body = js.stmts(op.body, 4);
  return "    " + js_string(op.name) + ": {\n      params: " + params + "],\n      types: " + types +
         "],\n      async: " + (op.async ? "true" : "false") + ",\n      run: function (m, a) {\n" +
         "        const l = m.locals(a);\n" + binds + body + "        return null;\n      }\n    }";
}

std::string app_script(const DslModule& m, const std::string& entry,
                       const std::vector<std::pair<const ScreenDecl*, detail::LoweredScreen>>& screens) {
  std::string out = "MUIT.define({\n  module: " + js_string(m.name) + ",\n  entry: " + js_string(entry) + ",\n";

  Interpreter interp(m);
  nlohmann::json entities = nlohmann::json::object();
  for (const auto& e : m.entities) entities[e.name] = interp.make_entity(e.name);
  out += "  entities: " + entities.dump() + ",\n";

  // A string passed where an entity is expected names the entity by its first String property.
  nlohmann::json keys = nlohmann::json::object();
  for (const auto& e : m.entities) {
    for (const auto& p : e.properties) {
      if (p.type.name == "String") {
        keys[e.name] = p.name;
        break;
      }
    }
  }
  out += "  keys: " + keys.dump() + ",\n";

  detail::JsEmitter js(m);
  out += "  globals: function (m) {\n";
  for (const auto& g : m.variables) {
    out += "    m.g[" + js_string(g.name) + "] = " + (g.init ? js.expr(*g.init) : std::string("null")) + ";\n";
  }
  out += "  },\n  operations: {\n";
  for (std::size_t i = 0; i < m.operations.size(); ++i) {
    out += operation_js(m, m.operations[i]) + (i + 1 < m.operations.size() ? ",\n" : "\n");
  }
  out += "  },\n  screens: {\n";
  for (std::size_t i = 0; i < screens.size(); ++i) {
    const auto& [s, low] = screens[i];
    std::string params = "[";
    for (std::size_t k = 0; k < s->params.size(); ++k) params += (k ? ", " : "") + js_string(s->params[k].name);
    out += "    " + js_string(s->name) + ": {\n      params: " + params + "],\n      offline: " +
           (s->cached_offline ? "true" : "false") + ",\n      show: function (m, l) {\n" + low.show + "      },\n" +
           "      bind: [\n";
    for (std::size_t k = 0; k < low.registrations.size(); ++k) {
      out += "        " + low.registrations[k] + (k + 1 < low.registrations.size() ? ",\n" : "\n");
    }
    out += "      ]\n    }" + std::string(i + 1 < screens.size() ? ",\n" : "\n");
  }
  out += "  }\n});\n";
  return out;
}

std::string entry_screen(const DslModule& m, const CompileOptions& options) {
  if (!options.entry.empty()) {
    if (!m.find_screen(options.entry)) {
      throw CompileError(CompileErrc::UnknownScreen, "entry screen '" + options.entry + "' is not declared");
    }
    return options.entry;
  }
  for (const auto& s : m.screens) {
    if (s.params.empty()) return s.name;
  }
  return m.screens.front().name;
}

void check_kinds(const DslModule& m) {
  for (const auto& w : m.widgets) {
    if (!detail::widget_lowering(w.kind)) {
      throw CompileError(CompileErrc::UnknownWidgetKind, "no lowering for widget kind '" + w.kind + "'");
    }
  }
  for (const auto& t : m.touches) {
    if (!detail::touch_lowering(t.kind)) {
      throw CompileError(CompileErrc::UnknownWidgetKind, "no lowering for touch kind '" + t.kind + "'");
    }
  }
}

// Back edges point at every screen that can reach their source.
NavigationGraph resolve(const DslModule& m, std::vector<NavEdge> raw) {
  NavigationGraph g;
  for (const auto& s : m.screens) g.nodes.push_back(s.name);
  std::map<std::string, std::set<std::string>> preds;
  for (const auto& e : raw) {
    if (e.kind != "back") preds[e.to].insert(e.from);
  }
  for (const auto& e : raw) {
    if (e.kind != "back") {
      g.edges.push_back(e);
      continue;
    }
    const auto& p = preds[e.from];
    if (p.empty()) {
      g.edges.push_back(e);
    } else {
      for (const auto& to : p) g.edges.push_back({e.from, to, "back", e.trigger});
    }
  }
  return g;
}

nlohmann::json edge_json(const NavEdge& e) {
  return {{"from", e.from}, {"to", e.to}, {"kind", e.kind}, {"trigger", e.trigger}};
}

Asset make_asset(std::string path, std::string content) {
  Asset a{std::move(path), std::move(content), {}};
  a.sha256 = sha256_hex(a.content);
  return a;
}

}  // namespace

std::string_view to_string(BindingTarget::Kind kind) {
  switch (kind) {
    case BindingTarget::Kind::Operation: return "operation";
    case BindingTarget::Kind::Navigate: return "navigate";
    case BindingTarget::Kind::Cascade: return "cascade";
    case BindingTarget::Kind::Back: return "back";
    case BindingTarget::Kind::Assign: return "assign";
    case BindingTarget::Kind::Script: return "script";
  }
  return "script";
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string_view runtime_script() { return runtime_script_impl(); }

const Asset* PageBundle::asset(std::string_view path) const {
  for (const auto& a : assets) {
    if (a.path == path) return &a;
  }
  return nullptr;
}

std::string PageBundle::manifest_text() const { return manifest.dump(2) + "\n"; }

void PageBundle::write(const std::filesystem::path& dir) const {
  auto put = [&](const std::string& rel, const std::string& content) {
    auto p = dir / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + p.string());
  };
  for (const auto& a : assets) put(a.path, a.content);
  put("manifest.json", manifest_text());
}

BindingTable binding_table(const DslModule& module) {
  BindingTable out;
  for (const auto& s : module.screens) {
    auto low = detail::lower_screen(module, s);
    out.insert(out.end(), low.bindings.begin(), low.bindings.end());
  }
  return out;
}

NavigationGraph build_navigation(const DslModule& module) {
  std::vector<NavEdge> raw;
  for (const auto& s : module.screens) {
    auto low = detail::lower_screen(module, s);
    raw.insert(raw.end(), low.edges.begin(), low.edges.end());
  }
  return resolve(module, std::move(raw));
}

std::vector<std::string> lower_rules(const ScreenDecl& screen, const DslModule& module) {
  auto low = detail::lower_screen(module, screen);
  std::vector<std::string> out;
  for (const auto& r : low.registrations) {
    auto pos = r.find(", rule: ");
    if (pos == std::string::npos) continue;
    auto end = r.rfind('}');
    out.push_back(r.substr(pos + 8, end - pos - 8));
  }
  return out;
}

std::string lower_expression(const Expr& expr, const DslModule& module) {
  detail::JsEmitter js(module);
  return js.expr(expr);
}

nlohmann::json emit_offline_manifest(const PageBundle& bundle) {
  std::vector<std::string> screens;
  std::set<std::string> paths;
  for (const auto& s : bundle.manifest.at("screens").items()) {
    if (!s.value().at("offline").get<bool>()) continue;
    screens.push_back(s.key());
    std::string doc = s.value().at("document");
    paths.insert(doc);
    if (const auto* a = bundle.asset(doc)) {
      for (auto& ref : detail::document_refs(a->content, doc)) {
        if (bundle.asset(ref)) paths.insert(ref);
      }
    }
  }
  nlohmann::json assets = nlohmann::json::array();
  for (const auto& p : paths) {
    const auto* a = bundle.asset(p);
    assets.push_back({{"path", p}, {"sha256", a->sha256}, {"bytes", a->content.size()}});
  }
  return {{"screens", screens}, {"assets", assets}};
}

PageBundle compile(const DslModule& input, const CompileOptions& options) {
  DslModule m = input;
  auto diags = check(m);
  if (has_errors(diags)) {
    std::string what = "module '" + m.name + "' has errors";
    for (const auto& d : diags) {
      if (d.severity == Severity::Error) {
        what += ": " + format(d, m.name);
        break;
      }
    }
    throw CompileError(CompileErrc::CheckFailed, what);
  }
  if (m.screens.empty()) throw CompileError(CompileErrc::NoScreens, "module '" + m.name + "' declares no screens");
  check_kinds(m);

  PageBundle b;
  b.module = m.name;
  b.entry = entry_screen(m, options);

  std::vector<std::pair<const ScreenDecl*, detail::LoweredScreen>> lowered;
  std::vector<NavEdge> raw;
  for (const auto& s : m.screens) {
    lowered.emplace_back(&s, detail::lower_screen(m, s));
    auto& low = lowered.back().second;
    b.bindings.insert(b.bindings.end(), low.bindings.begin(), low.bindings.end());
    raw.insert(raw.end(), low.edges.begin(), low.edges.end());
  }
  b.navigation = resolve(m, std::move(raw));

  b.assets.push_back(make_asset("app.js", app_script(m, b.entry, lowered)));
  b.assets.push_back(make_asset("assets/runtime.js", std::string(runtime_script())));
  b.assets.push_back(make_asset("styles/base.css", std::string(base_stylesheet())));
  for (const auto& p : options.platforms) b.assets.push_back(make_asset("styles/" + p + ".css", platform_stylesheet(p)));
  for (const auto& [s, low] : lowered) {
    b.screens[s->name] = document_path(s->name);
    b.assets.push_back(make_asset(document_path(s->name), screen_document(m.name, *s, low, options.platforms)));
  }
  std::sort(b.assets.begin(), b.assets.end(), [](const Asset& x, const Asset& y) { return x.path < y.path; });

  nlohmann::json screens = nlohmann::json::object();
  for (const auto& s : m.screens) {
    std::vector<std::string> params;
    for (const auto& p : s.params) params.push_back(p.name);
    screens[s.name] = {{"document", document_path(s.name)}, {"params", params}, {"offline", s.cached_offline}};
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : b.navigation.edges) edges.push_back(edge_json(e));
  nlohmann::json assets = nlohmann::json::array();
  for (const auto& a : b.assets) assets.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.content.size()}});

  b.manifest = {
      {"manifest_version", 1},
      {"module", m.name},
      {"entry", b.entry},
      {"platforms", options.platforms},
      {"screens", screens},
      {"navigation",
       {{"nodes", b.navigation.nodes},
        {"edges", edges},
        {"stack", {{"push_on", "select"}, {"pop_on", "back"}, {"visible", "top"}}}}},
      {"assets", assets},
  };
  b.manifest["offline"] = emit_offline_manifest(b);
  return b;
}

}  // namespace muit::codegen
