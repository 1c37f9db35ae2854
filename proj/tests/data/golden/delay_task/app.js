MUIT.define({
  module: "delay_task",
  entry: "delayTask",
  entities: {"Role":{"role":"initiator","task":null},"Task":{"createDate":"2014-07-21","dueDate":"2014-07-22","reason":null,"role":null,"status":"waiting for approval","tags":["reimbursement","travel","hotel","taxi"],"task_name":"Employee Travel Fee Approval","task_review":null}},
  keys: {"Role":"role","Task":"task_name"},
  globals: function (m) {
    m.g["taskList"] = null;
    m.g["taskname"] = "Michael's US Travel Reimbursement";
    m.g["delaytime"] = 0;
    m.g["reason"] = "We delay... ";
  },
  operations: {
    "import": {
      params: ["WSDLUrl", "user", "pwd"],
      types: ["String", "String", "String"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_WSDLUrl = a.length > 0 ? a[0] : null;
        l.v_user = a.length > 1 ? a[1] : null;
        l.v_pwd = a.length > 2 ? a[2] : null;
        m.setg("taskList", m.httpRequest(m.plus(m.plus(m.plus("/WSDLUrl?user=", l.v_user), "&pwd="), l.v_pwd)));
        return null;
      }
    },
    "getTaskInfo": {
      params: [],
      types: [],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        for (const $0 of m.iter(m.g["taskList"])) {
          l.v_t = $0;
          m.add(m.fromList("Task", l.v_t));
        }
        return null;
      }
    },
    "approveTask": {
      params: ["t"],
      types: ["Task"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_t = a.length > 0 ? a[0] : null;
        m.set(l.v_t, "status", "approved");
        return null;
      }
    },
    "delayTask": {
      params: ["t", "days", "reason"],
      types: ["Task", "int", "String"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_t = a.length > 0 ? a[0] : null;
        l.v_days = a.length > 1 ? a[1] : null;
        l.v_reason = a.length > 2 ? a[2] : null;
        m.set(l.v_t, "status", "delay");
        m.set(l.v_t, "dueDate", m.date.create([m.method(m.get(l.v_t, "dueDate"), "getYear", []), m.method(m.get(l.v_t, "dueDate"), "getMonth", []), m.plus(m.method(m.get(l.v_t, "dueDate"), "getDate", []), l.v_days)]));
        m.set(l.v_t, "reason", l.v_reason);
        return null;
      }
    },
    "searchTask": {
      params: ["taskList", "s"],
      types: ["List", "String"],
      async: false,
      run: function (m, a) {
        const l = m.locals(a);
        l.v_taskList = a.length > 0 ? a[0] : null;
        l.v_s = a.length > 1 ? a[1] : null;
        if (m.truthy(m.inList(l.v_s, l.v_taskList))) {
          return l.v_s;
        }
        return false;
        return null;
      }
    }
  },
  screens: {
    "delayTask": {
      params: [],
      offline: false,
      show: function (m, l) {
      },
      bind: [
        {id: "delayTask__1", event: "change", run: function (m, l, ev) {
          m.setg("delaytime", m.select(m.get(m.option, "value")));
        }},
        {id: "delayTask__2_0", attr: "value", get: function (m, l) { return m.g["reason"]; }, set: function (m, l, v) { m.setg("reason", v); }},
        {id: "delayTask__3_0", event: "click", run: function (m, l, ev) {
          m.call("delayTask", [m.g["taskname"], m.g["delaytime"], m.g["reason"]]);
        }}
      ]
    }
  }
});
