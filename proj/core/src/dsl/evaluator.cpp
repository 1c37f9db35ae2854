#include "muit/dsl/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>

#include "muit/dsl/checker.hpp"

namespace muit::dsl {

namespace {

constexpr int kMaxCallDepth = 200;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool truthy(const Value& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_null()) return false;
  if (v.is_number_integer()) return v.get<std::int64_t>() != 0;
  if (v.is_number()) return v.get<double>() != 0.0;
  if (v.is_string()) return !v.get_ref<const std::string&>().empty();
  return true;
}

std::string display(const Value& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

bool contains_ci(const Value& v, const std::string& needle, int depth) {
  if (v.is_string()) return lower(v.get<std::string>()).find(needle) != std::string::npos;
  if (depth <= 0) return false;
  if (v.is_object() || v.is_array()) {
    for (const auto& x : v) {
      if (contains_ci(x, needle, depth - 1)) return true;
    }
  }
  return false;
}

struct DateParts {
  int y = 1970, m = 1, d = 1, hh = 0, mm = 0, ss = 0;
};

DateParts parse_date(const Value& v) {
  if (!v.is_string()) throw EvalError("not a DateTime: " + v.dump());
  DateParts p;
  const std::string& s = v.get_ref<const std::string&>();
  int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &p.y, &p.m, &p.d, &p.hh, &p.mm, &p.ss);
  if (n < 3) throw EvalError("not a DateTime: " + s);
  return p;
}

std::int64_t as_int(const Value& v, const char* what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number()) return static_cast<std::int64_t>(v.get<double>());
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      auto n = std::stoll(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return n;
    } catch (const std::exception&) {
    }
  }
  throw EvalError(std::string(what) + " needs an int, got " + v.dump());
}

}  // namespace

std::string make_date(const std::vector<std::int64_t>& parts) {
  using namespace std::chrono;
  std::int64_t y = parts.size() > 0 ? parts[0] : 1970;
  std::int64_t m = parts.size() > 1 ? parts[1] : 1;
  std::int64_t d = parts.size() > 2 ? parts[2] : 1;
  std::int64_t secs = 0;
  if (parts.size() > 3) secs += parts[3] * 3600;
  if (parts.size() > 4) secs += parts[4] * 60;
  if (parts.size() > 5) secs += parts[5];
  std::int64_t months = y * 12 + (m - 1);
  std::int64_t ny = months >= 0 ? months / 12 : (months - 11) / 12;
  std::int64_t nm = months - ny * 12 + 1;
  std::int64_t day_shift = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
  secs -= day_shift * 86400;
  if (ny < -30000 || ny > 30000) throw EvalError("DateTime year out of range");
  sys_days base = sys_days(year{static_cast<int>(ny)} / month{static_cast<unsigned>(nm)} / day{1});
  base += days{d - 1 + day_shift};
  year_month_day ymd{base};
  char buf[40];
  if (parts.size() <= 3) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  } else if (parts.size() <= 5) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
                  static_cast<int>(secs % 60));
  }
  return buf;
}

bool string_in_list(const std::string& needle, const Value& list) {
  std::string n = lower(needle);
  if (list.is_string()) return contains_ci(list, n, 0);
  if (!list.is_array()) return false;
  for (const auto& el : list) {
    if (contains_ci(el, n, 3)) return true;
  }
  return false;
}

struct Interpreter::Frame {
  std::vector<std::map<std::string, Value>> scopes;
  std::map<std::string, const FunctionStmt*> functions;
  bool in_function = false;
};

Interpreter::Interpreter(const DslModule& module, Host* host)
    : module_(module), host_(host ? host : &default_host_), context_(Value::object()) {
  for (const auto& v : module_.variables) globals_[v.name] = nullptr;
  Frame f;
  for (const auto& v : module_.variables) {
    if (v.init) globals_[v.name] = eval(*v.init, f);
  }
}

void Interpreter::set_context(Value context) { context_ = std::move(context); }
void Interpreter::set_global(const std::string& name, Value v) { globals_[name] = std::move(v); }

const Value& Interpreter::global(const std::string& name) const {
  static const Value null_value;
  auto it = globals_.find(name);
  return it == globals_.end() ? null_value : it->second;
}

Value Interpreter::make_entity(const std::string& entity) const {
  const auto* e = module_.find_entity(entity);
  if (!e) throw EvalError("unknown entity '" + entity + "'");
  Value obj = Value::object();
  Interpreter* self = const_cast<Interpreter*>(this);
  for (const auto& p : e->properties) {
    Frame f;
    if (p.defaults.empty()) {
      obj[p.name] = nullptr;
    } else if (p.defaults.size() == 1 || p.enumeration) {
      obj[p.name] = self->eval(p.defaults.front(), f);
    } else {
      Value arr = Value::array();
      for (const auto& d : p.defaults) arr.push_back(self->eval(d, f));
      obj[p.name] = std::move(arr);
    }
  }
  return obj;
}

void Interpreter::tick() {
  if (++steps_ > step_limit_) throw EvalError("evaluation step limit exceeded");
}

Value Interpreter::call_operation(const std::string& name, std::vector<Value>& args) {
  const auto* op = module_.find_operation(name);
  if (!op) throw EvalError("unknown operation '" + name + "'");
  return call_op(*op, args);
}

Value Interpreter::evaluate(const Expr& e) {
  Frame f;
  return eval(e, f);
}

bool Interpreter::condition(const Expr& e, const Value& context) {
  Value saved = std::exchange(context_, context);
  Frame f;
  Value v;
  try {
    v = eval(e, f);
  } catch (...) {
    context_ = std::move(saved);
    throw;
  }
  context_ = std::move(saved);
  return truthy(v);
}

Value Interpreter::call_op(const OperationDecl& op, std::vector<Value>& args) {
  if (args.size() != op.params.size()) {
    throw EvalError("operation '" + op.name + "' expects " + std::to_string(op.params.size()) +
                    " argument(s), got " + std::to_string(args.size()));
  }
  if (++depth_ > kMaxCallDepth) {
    --depth_;
    throw EvalError("call depth limit exceeded");
  }
  Frame f;
  f.scopes.emplace_back();
  for (std::size_t i = 0; i < args.size(); ++i) {
    Value a = args[i];
    SemType t = resolve_type(op.params[i].type, module_);
    if (t.is(SemType::Kind::Entity) && a.is_string()) {
      // Lookup by key: a fresh record whose first string property is the key.
      Value key = a;
      a = make_entity(t.name);
      for (const auto& p : module_.find_entity(t.name)->properties) {
        if (resolve_type(p.type, module_).is(SemType::Kind::String)) {
          a[p.name] = key;
          break;
        }
      }
    }
    f.scopes.back()[op.params[i].name] = std::move(a);
  }
  Value result;
  try {
    exec(op.body, f);
  } catch (Return& r) {
    result = std::move(r.value);
  } catch (...) {
    --depth_;
    throw;
  }
  --depth_;
  for (std::size_t i = 0; i < args.size(); ++i) {
    Value& v = f.scopes.front()[op.params[i].name];
    if (v.is_object() || v.is_array()) args[i] = v;
  }
  return result;
}

Value Interpreter::call_function(const FunctionStmt& fn, std::vector<Value>& args, Frame&) {
  if (++depth_ > kMaxCallDepth) {
    --depth_;
    throw EvalError("call depth limit exceeded");
  }
  Frame f;
  f.in_function = true;
  f.scopes.emplace_back();
  for (std::size_t i = 0; i < fn.params.size(); ++i) {
    f.scopes.back()[fn.params[i].name] = i < args.size() ? args[i] : Value();
  }
  Value result;
  try {
    exec(fn.body, f);
  } catch (Return& r) {
    result = std::move(r.value);
  } catch (...) {
    --depth_;
    throw;
  }
  --depth_;
  return result;
}

void Interpreter::exec(const std::vector<Stmt>& body, Frame& f) {
  f.scopes.emplace_back();
  std::vector<std::string> declared;
  for (const auto& s : body) {
    if (const auto* fn = std::get_if<FunctionStmt>(&s.node)) {
      if (!f.functions.count(fn->name)) declared.push_back(fn->name);
      f.functions[fn->name] = fn;
    }
  }
  try {
    for (const auto& s : body) exec(s, f);
  } catch (...) {
    f.scopes.pop_back();
    for (const auto& n : declared) f.functions.erase(n);
    throw;
  }
  f.scopes.pop_back();
  for (const auto& n : declared) f.functions.erase(n);
}

void Interpreter::exec(const Stmt& s, Frame& f) {
  tick();
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarStmt>) {
          f.scopes.back()[n.name] = n.init ? eval(*n.init, f) : Value();
        } else if constexpr (std::is_same_v<T, AssignStmt>) {
          assign(n.target, eval(n.value, f), f);
        } else if constexpr (std::is_same_v<T, ForeachStmt>) {
          Value list = eval(n.iterable, f);
          if (list.is_null()) return;
          if (!list.is_array()) throw EvalError("foreach over a non-list value");
          for (const auto& el : list) {
            f.scopes.emplace_back();
            f.scopes.back()[n.var] = el;
            try {
              exec(n.body, f);
            } catch (...) {
              f.scopes.pop_back();
              throw;
            }
            f.scopes.pop_back();
          }
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          for (const auto& b : n.branches) {
            if (truthy(eval(b.condition, f))) {
              exec(b.body, f);
              return;
            }
          }
          if (n.else_body) exec(*n.else_body, f);
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          throw Return{n.value ? eval(*n.value, f) : Value()};
        } else if constexpr (std::is_same_v<T, ExprStmt>) {
          eval(n.expr, f);
        } else if constexpr (std::is_same_v<T, FunctionStmt>) {
          // Registered when the enclosing block was entered.
        }
      },
      s.node);
}

Value* Interpreter::lookup(const std::string& name, Frame& f) {
  for (auto it = f.scopes.rbegin(); it != f.scopes.rend(); ++it) {
    auto v = it->find(name);
    if (v != it->end()) return &v->second;
  }
  auto g = globals_.find(name);
  if (g != globals_.end()) return &g->second;
  return nullptr;
}

void Interpreter::assign(const Expr& target, Value v, Frame& f) {
  // Resolves an lvalue, creating intermediate objects for member paths.
  std::function<Value*(const Expr&)> place = [&](const Expr& e) -> Value* {
    if (const auto* n = std::get_if<NameExpr>(&e.node)) {
      Value* p = lookup(n->name, f);
      if (!p) throw EvalError("cannot assign to '" + n->name + "'");
      return p;
    }
    if (const auto* m = std::get_if<MemberExpr>(&e.node)) {
      Value* obj = place(*m->object);
      if (obj->is_null()) *obj = Value::object();
      if (!obj->is_object()) throw EvalError("cannot set member '" + m->member + "' on " + obj->type_name());
      return &(*obj)[m->member];
    }
    throw EvalError("left side of '=' is not assignable");
  };
  *place(target) = std::move(v);
}

Value Interpreter::eval(const Expr& e, Frame& f) {
  tick();
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LiteralExpr>) {
          switch (n.kind) {
            case LiteralExpr::Kind::Int: return n.int_value;
            case LiteralExpr::Kind::Boolean: return n.bool_value;
            default: return n.text;
          }
        } else if constexpr (std::is_same_v<T, NameExpr>) {
          if (Value* v = lookup(n.name, f)) return *v;
          if (n.name == "screen" || n.name == "network" || n.name == "location") {
            return context_.is_object() ? context_.value(n.name, Value::object()) : Value::object();
          }
          if (const auto* w = module_.find_widget(n.name)) {
            Value obj = Value::object();
            for (const auto& m : widget_members(*w)) obj[m] = global(m);
            return obj;
          }
          if (module_.find_operation(n.name) || module_.find_screen(n.name) ||
              module_.find_touch(n.name) || module_.find_entity(n.name)) {
            return n.name;
          }
          if (n.name == "option") return nullptr;
          throw EvalError("unresolved name '" + n.name + "'");
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          if (n.op == BinaryOp::And) return truthy(eval(*n.lhs, f)) && truthy(eval(*n.rhs, f));
          if (n.op == BinaryOp::Or) return truthy(eval(*n.lhs, f)) || truthy(eval(*n.rhs, f));
          Value l = eval(*n.lhs, f);
          Value r = eval(*n.rhs, f);
          switch (n.op) {
            case BinaryOp::Add:
              if (l.is_number_integer() && r.is_number_integer())
                return l.get<std::int64_t>() + r.get<std::int64_t>();
              if (l.is_number() && r.is_number()) return l.get<double>() + r.get<double>();
              if (l.is_string() || r.is_string()) return display(l) + display(r);
              throw EvalError("operator + undefined for " + std::string(l.type_name()) + "," + r.type_name());
            case BinaryOp::Sub: return as_int(l, "-") - as_int(r, "-");
            case BinaryOp::Mul: return as_int(l, "*") * as_int(r, "*");
            case BinaryOp::Mod: {
              auto d = as_int(r, "%");
              if (d == 0) throw EvalError("modulo by zero");
              return as_int(l, "%") % d;
            }
            case BinaryOp::Eq: return l == r;
            case BinaryOp::NotEq: return l != r;
            case BinaryOp::Less: return l < r;
            case BinaryOp::Greater: return r < l;
            case BinaryOp::LessEq: return !(r < l);
            case BinaryOp::GreaterEq: return !(l < r);
            case BinaryOp::In:
              if (l.is_string()) return string_in_list(l.get<std::string>(), r);
              if (r.is_array()) return std::find(r.begin(), r.end(), l) != r.end();
              return false;
            default: return nullptr;
          }
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          Value v = eval(*n.operand, f);
          if (n.op == UnaryOp::Not) return !truthy(v);
          return -as_int(v, "-");
        } else if constexpr (std::is_same_v<T, MemberExpr>) {
          Value obj = eval(*n.object, f);
          if (obj.is_object()) return obj.value(n.member, Value());
          if ((obj.is_string() || obj.is_array()) && n.member == "length") {
            return static_cast<std::int64_t>(obj.is_string() ? obj.get<std::string>().size() : obj.size());
          }
          if (obj.is_null()) return nullptr;
          throw EvalError("no member '" + n.member + "' on " + obj.type_name());
        } else if constexpr (std::is_same_v<T, CallExpr>) {
          return call(n, f);
        } else if constexpr (std::is_same_v<T, BlockExpr>) {
          exec(n.body, f);
          return nullptr;
        } else {
          std::vector<Value> args;
          for (const auto& a : n.args) args.push_back(eval(a, f));
          host_->navigate(n.screen, args);
          return n.screen;
        }
      },
      e.node);
}

Value Interpreter::call(const CallExpr& c, Frame& f) {
  // Method-style calls on builtin namespaces and values.
  if (const auto* m = std::get_if<MemberExpr>(&c.callee->node)) {
    std::vector<Value> args;
    for (const auto& a : c.args) args.push_back(eval(a, f));
    const auto* ns = std::get_if<NameExpr>(&m->object->node);
    bool shadowed = ns && lookup(ns->name, f);
    if (ns && !shadowed) {
      if (ns->name == "history" && (m->member == "go" || m->member == "back")) {
        host_->history(args.empty() ? -1 : static_cast<int>(as_int(args[0], "history")));
        return nullptr;
      }
      if (ns->name == "DateTime") {
        if (m->member == "now") return host_->now();
        if (m->member == "create") {
          std::vector<std::int64_t> parts;
          for (const auto& a : args) parts.push_back(as_int(a, "DateTime.create"));
          return make_date(parts);
        }
      }
      if (module_.find_entity(ns->name)) {
        if (m->member == "create") return make_entity(ns->name);
        if (m->member == "fromTaskList") {
          Value obj = make_entity(ns->name);
          if (!args.empty() && args[0].is_object()) {
            for (const auto& [k, v] : args[0].items()) obj[k] = v;
          }
          return obj;
        }
      }
    }
    Value obj = eval(*m->object, f);
    const std::string& name = m->member;
    if (name == "getYear") return parse_date(obj).y;
    if (name == "getMonth") return parse_date(obj).m;
    if (name == "getDate") return parse_date(obj).d;
    if (name == "getHours") return parse_date(obj).hh;
    if (name == "getMinutes") return parse_date(obj).mm;
    if (name == "getDay") {
      auto p = parse_date(obj);
      using namespace std::chrono;
      weekday wd{sys_days(year{p.y} / month{static_cast<unsigned>(p.m)} / day{static_cast<unsigned>(p.d)})};
      return static_cast<std::int64_t>(wd.c_encoding());
    }
    if (obj.is_string()) {
      std::string s = obj.get<std::string>();
      if (name == "toLowerCase") return lower(s);
      if (name == "toUpperCase") {
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
        return s;
      }
      if (name == "trim") {
        auto b = s.find_first_not_of(" \t\r\n");
        auto e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      }
    }
    throw EvalError("cannot call '" + name + "'");
  }

  const auto* name = std::get_if<NameExpr>(&c.callee->node);
  if (!name) throw EvalError("call of a non-function value");
  const std::string& n = name->name;

  std::vector<Value> args;
  for (const auto& a : c.args) args.push_back(eval(a, f));

  if (auto it = f.functions.find(n); it != f.functions.end()) return call_function(*it->second, args, f);

  if (Value* local = lookup(n, f)) {
    // Callback parameters hold an operation name.
    if (local->is_string() && module_.find_operation(local->get<std::string>())) {
      return call_operation(local->get<std::string>(), args);
    }
    return nullptr;
  }

  if (const auto* op = module_.find_operation(n)) {
    Value result = call_op(*op, args);
    // Entity and list arguments are shared with the caller.
    for (std::size_t i = 0; i < c.args.size() && i < args.size(); ++i) {
      if (!(args[i].is_object() || args[i].is_array())) continue;
      const auto& a = c.args[i];
      if (std::holds_alternative<NameExpr>(a.node) || std::holds_alternative<MemberExpr>(a.node)) {
        try {
          assign(a, args[i], f);
        } catch (const EvalError&) {
        }
      }
    }
    return result;
  }
  if (n == "exist") {
    if (args.empty()) return false;
    const Value& v = args[0];
    return !(v.is_null() || (v.is_string() && v.get<std::string>().empty()) ||
             ((v.is_array() || v.is_object()) && v.empty()));
  }
  if (n == "navigate") {
    if (args.empty()) return nullptr;
    std::vector<Value> rest(args.begin() + 1, args.end());
    host_->navigate(display(args[0]), rest);
    return nullptr;
  }
  if (n == "httpRequest") return host_->http_request(args.empty() ? std::string() : display(args[0]));
  if (n == "invoke") {
    std::vector<Value> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    return host_->invoke(args.empty() ? std::string() : display(args[0]), rest);
  }
  if (n == "add") {
    if (!args.empty()) host_->add(args[0]);
    return nullptr;
  }
  if (n == "select") return args.empty() ? Value() : args[0];
  if (module_.find_screen(n) || module_.find_widget(n) || module_.find_touch(n)) return n;
  throw EvalError("unresolved function '" + n + "'");
}

}  // namespace muit::dsl
