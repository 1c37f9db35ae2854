#pragma once

#include <set>
#include <string>
#include <vector>

#include "muit/dsl/ast.hpp"

namespace muit::codegen::detail {

// Quoted JavaScript string literal; safe to inline in a <script> element.
std::string js_string(std::string_view s);

// Lowers DSL expressions and statements to JavaScript running against the
// runtime object `m`. Locals live on the object `l` so that handlers,
// foreach templates and local functions can share them.
class JsEmitter {
 public:
  explicit JsEmitter(const dsl::DslModule& module) : module_(module) { scopes_.emplace_back(); }

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }
  void declare(const std::string& name) { scopes_.back().vars.insert(name); }

  std::string expr(const dsl::Expr& e);
  std::string stmts(const std::vector<dsl::Stmt>& body, int indent);
  std::string assign(const dsl::Expr& target, const std::string& value);
  bool is_local(const std::string& name) const;

 private:
  struct Scope {
    std::set<std::string> vars;
    std::set<std::string> functions;
  };

  std::string stmt(const dsl::Stmt& s, int indent);
  std::string call(const dsl::CallExpr& c);
  std::string args(const std::vector<dsl::Expr>& xs, std::size_t from = 0);
  bool is_local_function(const std::string& name) const;
  bool is_global(const std::string& name) const;

  const dsl::DslModule& module_;
  std::vector<Scope> scopes_;
  int temp_ = 0;
};

}  // namespace muit::codegen::detail
