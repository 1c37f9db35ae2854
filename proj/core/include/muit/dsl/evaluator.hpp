#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/dsl/ast.hpp"

namespace muit::dsl {

// Runtime values are JSON: entities are objects, lists are arrays and
// DateTime values are ISO-8601 strings.
using Value = nlohmann::json;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Effects the interpreter cannot perform on its own.
class Host {
 public:
  virtual ~Host() = default;
  virtual Value http_request(const std::string& url) { (void)url; return nullptr; }
  virtual Value invoke(const std::string& op, const std::vector<Value>& args) {
    (void)op;
    (void)args;
    return nullptr;
  }
  virtual void add(const Value& item) { (void)item; }
  virtual void navigate(const std::string& screen, const std::vector<Value>& args) {
    (void)screen;
    (void)args;
  }
  virtual void history(int delta) { (void)delta; }
  // ISO date-time of "now"; fixed by default so evaluation stays pure.
  virtual std::string now() { return "1970-01-01T00:00:00"; }
};

// Tree-walking interpreter over a checked module. Not thread-safe; create
// one per evaluation.
class Interpreter {
 public:
  explicit Interpreter(const DslModule& module, Host* host = nullptr);

  // Context variables seen by `screen.*`, `network.*` and `location.*`,
  // e.g. {"screen":{"deviceos":"iOS","window":{"innerWidth":600}}}.
  void set_context(Value context);
  void set_global(const std::string& name, Value v);
  const Value& global(const std::string& name) const;

  // Calls an operation. Arguments are passed by reference: mutations of
  // entity parameters are written back into `args`.
  Value call_operation(const std::string& name, std::vector<Value>& args);

  // Evaluates a standalone expression (globals and context in scope).
  Value evaluate(const Expr& e);

  // Evaluates a rule condition with `context` as the context snapshot.
  bool condition(const Expr& e, const Value& context);

  // A new entity object with declared defaults filled in.
  Value make_entity(const std::string& entity) const;

  std::size_t steps() const { return steps_; }
  void set_step_limit(std::size_t n) { step_limit_ = n; }

 private:
  struct Frame;
  struct Return {
    Value value;
  };

  Value eval(const Expr& e, Frame& f);
  void exec(const std::vector<Stmt>& body, Frame& f);
  void exec(const Stmt& s, Frame& f);
  Value* lookup(const std::string& name, Frame& f);
  Value call(const CallExpr& c, Frame& f);
  Value call_function(const FunctionStmt& fn, std::vector<Value>& args, Frame& f);
  Value call_op(const OperationDecl& op, std::vector<Value>& args);
  void assign(const Expr& target, Value v, Frame& f);
  void tick();

  const DslModule& module_;
  Host default_host_;
  Host* host_;
  Value context_;
  std::map<std::string, Value> globals_;
  std::size_t steps_ = 0;
  std::size_t step_limit_ = 1'000'000;
  int depth_ = 0;
};

// `needle in haystack` for a string needle: case-insensitive substring match
// against every string field of each element.
bool string_in_list(const std::string& needle, const Value& list);

// Calendar arithmetic used by DateTime.create: out-of-range months and days
// roll over, e.g. (2014, 7, 33) is 2014-08-02.
std::string make_date(const std::vector<std::int64_t>& parts);

}  // namespace muit::dsl
