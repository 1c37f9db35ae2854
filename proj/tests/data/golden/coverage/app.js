MUIT.define({
  module: "coverage",
  entry: "inbox",
  entities: {"Role":{"name":null,"task":null},"Task":{"dueDate":"2014-07-22T17:30","labels":["a","b"],"owner":null,"priority":2,"status":"open","task_name":"Expense report","urgent":false}},
  keys: {"Role":"name","Task":"task_name"},
  globals: function (m) {
    m.g["tasks"] = null;
    m.g["query"] = "";
    m.g["counter"] = 0;
  },
  operations: {
    "import": {
      params: ["url", "user", "pwd"],
      types: ["String", "String", "String"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_url = a.length > 0 ? a[0] : null;
        l.v_user = a.length > 1 ? a[1] : null;
        l.v_pwd = a.length > 2 ? a[2] : null;
        m.setg("tasks", m.httpRequest(m.plus(m.plus(m.plus(m.plus(l.v_url, "?user="), l.v_user), "&pwd="), l.v_pwd)));
        return null;
      }
    },
    "refresh": {
      params: ["url", "done"],
      types: ["String", "callback"],
      async: true,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_url = a.length > 0 ? a[0] : null;
        l.v_done = a.length > 1 ? a[1] : null;
        l.v_fresh = m.invoke("getTaskInfo", [l.v_url]);
        m.callValue(l.v_done, [l.v_fresh]);
        return null;
      }
    },
    "score": {
      params: ["t"],
      types: ["Task"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_t = a.length > 0 ? a[0] : null;
        l.v_s = (m.mod((m.get(l.v_t, "priority") * 10), 7) - 1);
        if (m.truthy((m.truthy(m.get(l.v_t, "urgent")) && m.truthy(!m.truthy(m.eq(m.get(l.v_t, "status"), "approved")))))) {
          l.v_s = m.plus(l.v_s, 5);
        } else if (m.truthy((m.truthy(m.cmp(m.get(l.v_t, "priority"), 3) >= 0) || m.truthy(m.cmp(m.get(l.v_t, "priority"), 0) <= 0)))) {
          l.v_s = (-l.v_s);
        } else if (m.truthy(!m.eq(m.get(l.v_t, "priority"), 1))) {
          l.v_s = m.plus(l.v_s, 1);
        } else {
          return 0;
        }
        for (const $0 of m.iter(m.get(l.v_t, "labels"))) {
          l.v_l = $0;
          if (m.truthy(m.exist(l.v_l))) {
            m.setg("counter", m.plus(m.g["counter"], 1));
          }
        }
        return l.v_s;
        return null;
      }
    },
    "matches": {
      params: ["all", "s"],
      types: ["List", "String"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_all = a.length > 0 ? a[0] : null;
        l.v_s = a.length > 1 ? a[1] : null;
        l.f_t_none = (function (o) {
          return function (...a) {
            const l = Object.create(o);
            return false;
            return null;
          };
        })(l);
        if (m.truthy(m.inList(l.v_s, l.v_all))) {
          return true;
        }
        return l.f_t_none();
        return null;
      }
    }
  },
  screens: {
    "inbox": {
      params: [],
      offline: true,
      show: function (m, l) {
    l.v_shown = 0;
      },
      bind: [
        {id: "inbox__0_0", event: "click", run: function (m, l, ev) {
          m.call("refresh", ["/svc", (function () {
  m.setg("counter", m.plus(m.g["counter"], 1));
})]);
        }},
        {id: "inbox__1_0", foreach: function (m, l) { return l.v_items; }, as: "v_t"},
        {id: "inbox__1_0_0_0", attr: "text", get: function (m, l) { return m.get(l.v_t, "task_name"); }, in: "inbox__1_0"},
        {id: "inbox__2_0", attr: "value", get: function (m, l) { return m.g["query"]; }, set: function (m, l, v) { m.setg("query", v); }},
        {id: "inbox__3", event: "tap", run: function (m, l, ev) {
          l.v_screen = "inbox";
          m.navigate("details", []);
        }},
        {id: "inbox__5", rule: function (m) { if (m.truthy(m.eq(m.get(m.ctx.screen, "deviceos"), "iOS"))) return 0; if (m.truthy((m.truthy(m.eq(m.get(m.ctx.location, "country"), "CN")) && m.truthy(m.get(m.ctx.network, "online"))))) return 1; return 2; }},
        {id: "inbox__5_0_0", event: "click", run: function (m, l, ev) {
          m.history("back", [(-1)]);
        }},
        {id: "inbox__6", rule: function (m) { if (m.truthy((m.truthy(m.cmp(m.get(m.get(m.ctx.screen, "window"), "innerHeight"), 400) < 0) || m.truthy(m.eq(m.get(m.get(m.ctx.screen, "device"), "model"), "iPhone 4s"))))) return 0; return -1; }},
        {id: "inbox__7_0_0", foreach: function (m, l) { return m.g["tasks"]; }, as: "v_t"},
        {id: "inbox__7_0_0_0_c0", text: function (m, l) { return m.get(l.v_t, "task_name"); }, in: "inbox__7_0_0"},
        {id: "inbox__7_0_0_0", event: "click", run: function (m, l, ev) {
          m.navigate("details", [l.v_t]);
        }, in: "inbox__7_0_0"},
        {id: "inbox__7_1", event: "submit", run: function (m, l, ev) {
          l.v_shown = m.plus(l.v_shown, 1);
          m.open("details", [m.g["query"]]);
        }}
      ]
    },
    "details": {
      params: ["t"],
      offline: false,
      show: function (m, l) {
      },
      bind: [
        {id: "details__0_t", text: function (m, l) { return m.get(l.v_t, "task_name"); }},
        {id: "details__1_c0", text: function (m, l) { return m.get(l.v_t, "status"); }},
        {id: "details__2", event: "click", run: function (m, l, ev) {
          m.history("go", [(-1)]);
        }}
      ]
    }
  }
});
