#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "muit/dsl/diagnostic.hpp"
#include "muit/dsl/types.hpp"
#include "muit/util/box.hpp"

namespace muit::dsl {

using NodeId = std::uint32_t;

// Syntactic type reference, e.g. `String`, `Task`, `List<Task>`, `Role<manager>`.
struct TypeRef {
  std::string name;
  std::vector<TypeRef> args;

  bool empty() const { return name.empty(); }
  friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

struct Param {
  NodeId id = 0;
  TypeRef type;  // empty when the parameter is untyped
  std::string name;
  SemType sem;
};

enum class BinaryOp {
  Add, Sub, Mul, Mod,
  Eq, NotEq, Less, Greater, LessEq, GreaterEq,
  Or, And, In,
};

enum class UnaryOp { Not, Negate };

std::string_view to_string(BinaryOp op);
std::string_view to_string(UnaryOp op);

struct Expr;
struct Stmt;

struct LiteralExpr {
  enum class Kind { String, Int, DateTime, Boolean };
  Kind kind = Kind::String;
  std::string text;  // string contents, integer digits, or ISO date-time
  std::int64_t int_value = 0;
  bool bool_value = false;
};

struct NameExpr {
  std::string name;
};

struct BinaryExpr {
  BinaryOp op = BinaryOp::Add;
  Box<Expr> lhs;
  Box<Expr> rhs;
};

struct UnaryExpr {
  UnaryOp op = UnaryOp::Not;
  Box<Expr> operand;
};

struct CallExpr {
  Box<Expr> callee;
  std::vector<Expr> args;
};

struct MemberExpr {
  Box<Expr> object;
  std::string member;
};

// `{ statement* }` used as a value, typically an event handler body.
struct BlockExpr {
  std::vector<Stmt> body;
};

// `new Screen(args)`: opens a cascading screen.
struct NewExpr {
  std::string screen;
  std::vector<Expr> args;
};

struct Expr {
  NodeId id = 0;
  std::variant<LiteralExpr, NameExpr, BinaryExpr, UnaryExpr, CallExpr,
               MemberExpr, BlockExpr, NewExpr>
      node;
  SemType type;  // filled by check()
};

struct VarStmt {
  std::string name;
  std::optional<Expr> init;
};

struct AssignStmt {
  Expr target;
  Expr value;
};

struct ForeachStmt {
  std::string var;
  Expr iterable;
  std::vector<Stmt> body;
};

struct IfBranch {
  Expr condition;
  std::vector<Stmt> body;
};

struct IfStmt {
  std::vector<IfBranch> branches;  // if, elseif...
  std::optional<std::vector<Stmt>> else_body;
};

struct ReturnStmt {
  std::optional<Expr> value;
};

struct ExprStmt {
  Expr expr;
};

// Local helper function, as used inside touch bodies.
struct FunctionStmt {
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
};

struct Stmt {
  NodeId id = 0;
  std::variant<VarStmt, AssignStmt, ForeachStmt, IfStmt, ReturnStmt, ExprStmt,
               FunctionStmt>
      node;
};

// ---------------------------------------------------------------------------
// View items

struct ScreenItem;

struct Attribute {
  std::string name;
  Expr value;
};

// A view element. Either brace/paren form (`button { "back", history.go(-1); }`)
// or markup form (`<input type="text" value=reason/>`).
struct Element {
  std::string tag;
  bool markup = false;
  std::vector<Expr> contents;       // label / text content
  std::vector<Attribute> attributes;
  std::vector<Stmt> actions;        // run on the element's default event
  std::vector<ScreenItem> children;
};

struct HeaderItem {
  Expr title;
  std::vector<ScreenItem> body;
};

// `import(c1)` or `import(swipelefttoright(approveTask))`.
struct ImportItem {
  Expr target;
};

struct HandlerItem {
  std::vector<ScreenItem> items;
};

enum class ContextTrigger { When, Where };

struct Context {
  ContextTrigger trigger = ContextTrigger::When;
  Expr condition;
};

struct RuleBranch {
  Context context;
  std::vector<ScreenItem> adaptation;
};

// Ordered branches, first match wins; optional trailing else.
struct Rule {
  std::vector<RuleBranch> branches;
  std::optional<std::vector<ScreenItem>> otherwise;
};

struct RuleItem {
  Rule rule;
};

struct VarItem {
  VarStmt var;
};

// Repeats its body once per element of a list.
struct ForeachItem {
  std::string var;
  Expr iterable;
  std::vector<ScreenItem> body;
};

// A statement run when the screen is shown.
struct StmtItem {
  Stmt stmt;
};

struct ScreenItem {
  NodeId id = 0;
  std::variant<Element, HeaderItem, ImportItem, HandlerItem, RuleItem, VarItem,
               ForeachItem, StmtItem>
      node;
};

// ---------------------------------------------------------------------------
// Declarations

struct PropertyDecl {
  NodeId id = 0;
  TypeRef type;
  std::string name;
  std::vector<Expr> defaults;  // one default, or a list default
  bool enumeration = false;    // defaults written `a | b | c`
  std::vector<std::string> annotations;
  SemType sem;
};

struct EntityDecl {
  NodeId id = 0;
  std::string name;
  std::vector<PropertyDecl> properties;
};

struct OperationDecl {
  NodeId id = 0;
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  bool async = false;
  SemType return_type;
};

struct ScreenDecl {
  NodeId id = 0;
  std::string name;
  std::vector<Param> params;
  std::vector<ScreenItem> items;
  bool cached_offline = false;
};

struct WidgetDecl {
  NodeId id = 0;
  std::string kind;
  std::string name;
  std::vector<Param> params;
  std::vector<ScreenItem> body;
};

using TouchDecl = WidgetDecl;

struct GlobalVar {
  NodeId id = 0;
  std::string name;
  std::optional<Expr> init;
  SemType sem;
};

struct DslModule {
  std::string name = "main";
  std::vector<EntityDecl> entities;
  std::vector<OperationDecl> operations;
  std::vector<ScreenDecl> screens;
  std::vector<WidgetDecl> widgets;
  std::vector<TouchDecl> touches;
  std::vector<GlobalVar> variables;
  std::map<NodeId, SourceLocation> source_span_index;

  const EntityDecl* find_entity(std::string_view n) const;
  const OperationDecl* find_operation(std::string_view n) const;
  const ScreenDecl* find_screen(std::string_view n) const;
  const WidgetDecl* find_widget(std::string_view n) const;
  const TouchDecl* find_touch(std::string_view n) const;
  const GlobalVar* find_variable(std::string_view n) const;
  SourceLocation location_of(NodeId id) const;
};

// Structural equality ignoring node ids, source spans and resolved types.
bool structurally_equal(const DslModule& a, const DslModule& b);

// Visitors over the statement/item trees; callbacks see every nested node.
void for_each_expr(const Expr& e, const std::function<void(const Expr&)>& fn);
void for_each_expr(const Stmt& s, const std::function<void(const Expr&)>& fn);
void for_each_stmt(const std::vector<Stmt>& body,
                   const std::function<void(const Stmt&)>& fn);

}  // namespace muit::dsl
