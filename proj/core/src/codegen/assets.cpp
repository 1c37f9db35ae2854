#include <string>
#include <string_view>

namespace muit::codegen {

namespace {

constexpr std::string_view kRuntime = R"JS((function (root) {
  "use strict";

  // Type ranks mirror the engine's value ordering so rules agree on both sides.
  function rank(v) {
    if (v === null || v === undefined) return 0;
    if (typeof v === "boolean") return 1;
    if (typeof v === "number") return 2;
    if (Array.isArray(v)) return 4;
    if (typeof v === "object") return 3;
    return 5;
  }

  function truthy(v) {
    if (v === null || v === undefined) return false;
    if (typeof v === "boolean") return v;
    if (typeof v === "number") return v !== 0;
    if (typeof v === "string") return v.length > 0;
    return true;
  }

  function eq(a, b) {
    if (rank(a) !== rank(b)) return false;
    if (Array.isArray(a)) {
      if (a.length !== b.length) return false;
      for (let i = 0; i < a.length; i++) if (!eq(a[i], b[i])) return false;
      return true;
    }
    if (a !== null && typeof a === "object") {
      const ka = Object.keys(a).sort(), kb = Object.keys(b).sort();
      if (!eq(ka, kb)) return false;
      for (const k of ka) if (!eq(a[k], b[k])) return false;
      return true;
    }
    return (a === undefined ? null : a) === (b === undefined ? null : b);
  }

  function cmp(a, b) {
    const ra = rank(a), rb = rank(b);
    if (ra !== rb) return ra < rb ? -1 : 1;
    if (ra === 0) return 0;
    if (ra === 4) {
      for (let i = 0; i < Math.min(a.length, b.length); i++) {
        const c = cmp(a[i], b[i]);
        if (c !== 0) return c;
      }
      return a.length - b.length;
    }
    if (ra === 3) return cmp(JSON.stringify(a), JSON.stringify(b));
    return a < b ? -1 : a > b ? 1 : 0;
  }

  function display(v) {
    if (typeof v === "string") return v;
    if (v === null || v === undefined) return "";
    return JSON.stringify(v);
  }

  function containsCi(v, needle, depth) {
    if (typeof v === "string") return v.toLowerCase().indexOf(needle) >= 0;
    if (depth <= 0 || v === null || typeof v !== "object") return false;
    for (const x of Object.values(v)) if (containsCi(x, needle, depth - 1)) return true;
    return false;
  }

  function pad(n, w) { return String(n).padStart(w || 2, "0"); }

  function makeDate(parts) {
    const p = parts.map(Number);
    const y = p.length > 0 ? p[0] : 1970, mo = p.length > 1 ? p[1] : 1, d = p.length > 2 ? p[2] : 1;
    let secs = (p.length > 3 ? p[3] * 3600 : 0) + (p.length > 4 ? p[4] * 60 : 0) + (p.length > 5 ? p[5] : 0);
    const dt = new Date(0);
    dt.setUTCFullYear(y, mo - 1, d);
    const at = new Date(dt.getTime() + secs * 1000);
    const date = pad(at.getUTCFullYear(), 4) + "-" + pad(at.getUTCMonth() + 1) + "-" + pad(at.getUTCDate());
    if (p.length <= 3) return date;
    const hm = date + "T" + pad(at.getUTCHours()) + ":" + pad(at.getUTCMinutes());
    return p.length <= 5 ? hm : hm + ":" + pad(at.getUTCSeconds());
  }

  function parseDate(v) {
    const r = /^(-?\d+)-(\d+)-(\d+)(?:T(\d+):(\d+)(?::(\d+))?)?/.exec(String(v));
    if (!r) return null;
    return r.slice(1).map(function (x) { return x === undefined ? 0 : Number(x); });
  }

  function Model(app, hooks) {
    const m = this;
    m.app = app;
    m.hooks = hooks || {};
    m.g = {};
    m.ctx = { screen: {}, network: {}, location: {} };
    m.option = null;
    m.truthy = truthy;
    m.eq = eq;
    m.cmp = cmp;
    m.date = {
      now: function () { return m.hooks.now ? m.hooks.now() : new Date().toISOString().slice(0, 19); },
      create: function (a) { return makeDate(a); }
    };
    m.watchers = [];
  }

  Model.prototype.locals = function () { return Object.create(null); };
  Model.prototype.setg = function (k, v) { this.g[k] = v; this.changed(); };
  Model.prototype.changed = function () { for (const w of this.watchers) w(); };
  Model.prototype.plus = function (a, b) {
    if (typeof a === "number" && typeof b === "number") return a + b;
    return display(a) + display(b);
  };
  Model.prototype.mod = function (a, b) {
    a = Math.trunc(Number(a)); b = Math.trunc(Number(b));
    if (b === 0) throw new Error("modulo by zero");
    return a % b;
  };
  Model.prototype.inList = function (needle, list) {
    if (typeof needle === "string") {
      const n = needle.toLowerCase();
      if (typeof list === "string") return containsCi(list, n, 0);
      if (!Array.isArray(list)) return false;
      return list.some(function (el) { return containsCi(el, n, 3); });
    }
    return Array.isArray(list) && list.some(function (el) { return eq(el, needle); });
  };
  Model.prototype.get = function (obj, k) {
    if (obj === null || obj === undefined) return null;
    if (k === "length" && (typeof obj === "string" || Array.isArray(obj))) return obj.length;
    if (typeof obj === "object" && !Array.isArray(obj)) return Object.prototype.hasOwnProperty.call(obj, k) ? obj[k] : null;
    throw new Error("no member '" + k + "'");
  };
  Model.prototype.set = function (obj, k, v) {
    if (obj !== null && typeof obj === "object") obj[k] = v;
    this.changed();
  };
  Model.prototype.iter = function (v) { return Array.isArray(v) ? v.slice() : []; };
  Model.prototype.create = function (entity) {
    return JSON.parse(JSON.stringify(this.app.entities[entity] || {}));
  };
  Model.prototype.fromList = function (entity, src) {
    const o = this.create(entity);
    if (src && typeof src === "object" && !Array.isArray(src)) for (const k of Object.keys(src)) o[k] = src[k];
    return o;
  };
  Model.prototype.method = function (obj, name, a) {
    if (typeof obj === "string") {
      if (name === "toLowerCase") return obj.toLowerCase();
      if (name === "toUpperCase") return obj.toUpperCase();
      if (name === "trim") return obj.trim();
      const d = parseDate(obj);
      if (d) {
        if (name === "getYear") return d[0];
        if (name === "getMonth") return d[1];
        if (name === "getDate") return d[2];
        if (name === "getHours") return d[3];
        if (name === "getMinutes") return d[4];
        if (name === "getDay") return new Date(Date.UTC(d[0], d[1] - 1, d[2])).getUTCDay();
      }
    }
    if (Array.isArray(obj) && name === "add") { obj.push(a[0]); this.changed(); return null; }
    return null;
  };
  Model.prototype.call = function (op, a) {
    const o = this.app.operations[op];
    if (!o) throw new Error("unknown operation " + op);
    const keys = this.app.keys || {};
    const args = a.map(function (v, i) {
      const t = o.types[i];
      if (typeof v === "string" && this.app.entities[t]) {
        const e = this.create(t);
        if (keys[t]) e[keys[t]] = v;
        return e;
      }
      return v;
    }, this);
    return o.run(this, args);
  };
  Model.prototype.callValue = function (fn, a) {
    if (typeof fn === "function") return fn.apply(null, a);
    if (typeof fn === "string" && this.app.operations[fn]) return this.call(fn, a);
    return null;
  };
  Model.prototype.exist = function (v) { return v !== null && v !== undefined; };
  Model.prototype.widget = function (name) { return this.g; };
  Model.prototype.select = function (v) { this.option = v; return v; };
  Model.prototype.add = function (v) { if (this.hooks.add) this.hooks.add(v); return null; };
  Model.prototype.httpRequest = function (url) { return this.hooks.http ? this.hooks.http(url) : null; };
  Model.prototype.invoke = function (op, a) { return this.hooks.invoke ? this.hooks.invoke(op, a) : null; };
  Model.prototype.navigate = function (screen, a) { if (this.hooks.navigate) this.hooks.navigate(screen, a); return null; };
  Model.prototype.open = function (screen, a) { if (this.hooks.navigate) this.hooks.navigate(screen, a, true); return screen; };
  Model.prototype.history = function (kind, a) {
    const delta = a.length ? Number(a[0]) : -1;
    if (this.hooks.history) this.hooks.history(delta);
    return null;
  };

  function contextSnapshot(win) {
    const nav = win.navigator || {};
    const ua = String(nav.userAgent || "");
    const os = /iPhone|iPad|iPod/.test(ua) ? "iOS" : /Android/.test(ua) ? "Android" : "other";
    const orient = win.innerWidth > win.innerHeight ? "landscape" : "portrait";
    return {
      screen: { deviceos: os, orientation: orient, width: win.innerWidth, height: win.innerHeight,
                window: { innerWidth: win.innerWidth, innerHeight: win.innerHeight } },
      network: { online: nav.onLine !== false },
      location: {}
    };
  }

  // Browser side: mount the screen named by <body data-screen>.
  function mount(app, doc, win) {
    const name = doc.body.getAttribute("data-screen");
    const screen = app.screens[name];
    if (!screen) return;
    const store = win.sessionStorage;
    const key = "muit:" + app.module;
    const base = doc.body.getAttribute("data-result-url") || "../../result";
    const m = new Model(app, {
      navigate: function (target, a) {
        store.setItem(key + ":args:" + target, JSON.stringify(a || []));
        store.setItem(key, JSON.stringify(m.g));
        win.location.href = target + ".html";
      },
      history: function (delta) { win.history.go(delta); },
      invoke: function (op, a) {
        const req = new win.XMLHttpRequest();
        req.open("POST", base, false);
        req.setRequestHeader("Content-Type", "application/json");
        req.send(JSON.stringify({ op: op, cid: doc.body.getAttribute("data-cid") || "", data: a }));
        try { return JSON.parse(req.responseText); } catch (e) { return null; }
      }
    });
    m.ctx = contextSnapshot(win);
    const saved = store.getItem(key);
    if (saved) m.g = JSON.parse(saved); else app.globals(m);

    for (const link of doc.querySelectorAll("link[data-platform]")) {
      link.disabled = link.getAttribute("data-platform") !== m.ctx.screen.deviceos.toLowerCase();
    }

    const l = Object.create(null);
    const args = JSON.parse(store.getItem(key + ":args:" + name) || "[]");
    screen.params.forEach(function (p, i) { l["v_" + p] = i < args.length ? args[i] : null; });
    screen.show(m, l);

    const refresh = [];
    function attach(scopeEl, l) {
      for (const b of screen.bind) {
        const el = scopeEl.querySelector("#" + b.id) || (scopeEl.id === b.id ? scopeEl : null);
        if (!el) continue;
        if (b.init) b.init(m, l);
        if (b.text) refresh.push(function () { el.textContent = display(b.text(m, l)); });
        if (b.attr) {
          refresh.push(function () { el[b.attr] = display(b.get(m, l)); });
          if (b.set) el.addEventListener("change", function () { b.set(m, l, el.value); });
        }
        if (b.event) {
          el.addEventListener(b.event, function (ev) { m.option = ev.detail || null; b.run(m, l, ev); m.changed(); });
        }
        if (b.run && !b.event) b.run(m, l, null);
        if (b.rule) {
          refresh.push(function () {
            const i = b.rule(m);
            if (el.getAttribute("data-active") === String(i)) return;
            el.setAttribute("data-active", String(i));
            for (const c of Array.from(el.children)) if (c.tagName !== "TEMPLATE") el.removeChild(c);
            const t = el.querySelector("template[data-branch=\"" + i + "\"]");
            if (t) { el.appendChild(t.content.cloneNode(true)); attach(el, l); }
          });
        }
        if (b.foreach) {
          refresh.push(function () {
            for (const c of Array.from(el.children)) if (c.tagName !== "TEMPLATE") el.removeChild(c);
            const t = el.querySelector("template");
            for (const item of m.iter(b.foreach(m, l))) {
              const inner = Object.create(l);
              inner[b.as] = item;
              const frag = t.content.cloneNode(true);
              const holder = doc.createElement("div");
              holder.appendChild(frag);
              for (const n of holder.querySelectorAll("[id]")) n.removeAttribute("id");
              el.appendChild(holder);
            }
          });
        }
      }
    }
    attach(doc.body, l);
    m.watchers.push(function () { for (const r of refresh) r(); store.setItem(key, JSON.stringify(m.g)); });
    win.addEventListener("resize", function () { m.ctx = contextSnapshot(win); m.changed(); });
    m.changed();
  }

  const MUIT = {
    Model: Model,
    truthy: truthy,
    eq: eq,
    cmp: cmp,
    makeDate: makeDate,
    app: null,
    define: function (app) {
      MUIT.app = app;
      if (typeof document !== "undefined" && typeof window !== "undefined") {
        document.addEventListener("DOMContentLoaded", function () { mount(app, document, window); });
      }
      return app;
    }
  };

  root.MUIT = MUIT;
  if (typeof module !== "undefined" && module.exports) module.exports = MUIT;
})(typeof globalThis !== "undefined" ? globalThis : this);
)JS";

constexpr std::string_view kBaseCss = R"CSS(* { box-sizing: border-box; }
body { margin: 0; font-family: sans-serif; font-size: 16px; }
template { display: none; }
.muit-header { display: flex; align-items: center; gap: 8px; padding: 8px 12px; }
.muit-header h1 { font-size: 1.2em; margin: 0; flex: 1; }
form { display: flex; flex-direction: column; gap: 8px; padding: 12px; }
label { font-weight: bold; }
input, button { font-size: 1em; padding: 6px 10px; }
ul { list-style: none; margin: 0; padding: 0; }
li { padding: 8px 12px; border-bottom: 1px solid #ddd; }
.muit-widget { margin: 8px 12px; }
.muit-touch { min-height: 1px; }
)CSS";

constexpr std::string_view kIosCss = R"CSS(body { font-family: -apple-system, "Helvetica Neue", sans-serif; }
.muit-header { background: #f7f7f7; border-bottom: 1px solid #c8c7cc; justify-content: center; }
button { border: none; background: none; color: #007aff; }
)CSS";

constexpr std::string_view kAndroidCss = R"CSS(body { font-family: Roboto, sans-serif; }
.muit-header { background: #3f51b5; color: #fff; }
button { border: none; border-radius: 2px; background: #3f51b5; color: #fff; text-transform: uppercase; }
)CSS";

}  // namespace

std::string_view runtime_script_impl() { return kRuntime; }
std::string_view base_stylesheet() { return kBaseCss; }

std::string platform_stylesheet(std::string_view platform) {
  if (platform == "ios") return std::string(kIosCss);
  if (platform == "android") return std::string(kAndroidCss);
  return "/* " + std::string(platform) + " */\n";
}

}  // namespace muit::codegen
