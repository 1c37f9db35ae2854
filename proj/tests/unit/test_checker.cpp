#include <doctest.h>

#include <map>

#include "muit/dsl/checker.hpp"
#include "muit/dsl/parser.hpp"
#include "support.hpp"

using namespace muit::dsl;

namespace {

struct Checked {
  DslModule module;
  Diagnostics parse;
  Diagnostics check;
};

Checked run(std::string_view src) {
  auto r = parse_source(src);
  Checked c{std::move(r.module), std::move(r.diagnostics), {}};
  c.check = muit::dsl::check(c.module);
  return c;
}

std::vector<DiagCode> error_codes(const Diagnostics& d) {
  std::vector<DiagCode> out;
  for (const auto& x : d)
    if (x.severity == Severity::Error) out.push_back(x.code);
  return out;
}

}  // namespace

TEST_CASE("every corpus module checks cleanly") {
  for (const char* name : {"device_type.muit", "data_model.muit", "delay_task.muit",
                           "touch_swipe.muit", "screen_estate.muit", "approve_task.muit",
                           "coverage.muit"}) {
    std::string file = name;
    CAPTURE(file);
    auto c = run(muit::test::corpus(name));
    REQUIRE(c.parse.empty());
    for (const auto& d : c.check) CAPTURE(format(d, name));
    CHECK(error_codes(c.check).empty());
  }
}

TEST_CASE("delay task screen binds the handler to the operation") {
  auto c = run(muit::test::corpus("delay_task.muit"));
  REQUIRE(error_codes(c.check).empty());
  const auto* s = c.module.find_screen("delayTask");
  REQUIRE(s);
  const auto& handler = std::get<HandlerItem>(s->items.back().node);
  const auto& button = std::get<Element>(handler.items[0].node);
  REQUIRE(button.attributes.size() == 1);
  CHECK(button.attributes[0].name == "onClick");
  const auto& block = std::get<BlockExpr>(button.attributes[0].value.node);
  const auto& call = std::get<CallExpr>(std::get<ExprStmt>(block.body[0].node).expr.node);
  CHECK(call.callee->type == SemType::named(SemType::Kind::Operation, "delayTask"));
  CHECK(print(std::get<ExprStmt>(block.body[0].node).expr) ==
        "delayTask(taskname, c1.delaytime, tx1.reason)");
  CHECK(call.args[1].type == SemType::integer());
  CHECK(call.args[2].type == SemType::string());
}

TEST_CASE("unresolved widget") {
  auto c = run("screen s { import(c9); }");
  REQUIRE(c.check.size() == 1);
  CHECK(c.check[0].code == DiagCode::UnresolvedWidget);
  CHECK(c.check[0].message == "unresolved widget 'c9'");
}

TEST_CASE("date arithmetic must go through DateTime.create") {
  auto c = run("entity Task { DateTime dueDate; }\n"
               "operation f(Task t) { var d = t.dueDate + 3; }");
  REQUIRE(c.check.size() == 1);
  CHECK(c.check[0].code == DiagCode::OperatorUndefined);
  CHECK(c.check[0].message == "operator + undefined for DateTime,int");
}

// Independent statement of the operator table for the four primitive types.
TEST_CASE("operator table by exhaustive enumeration") {
  const std::vector<std::string> types = {"String", "int", "boolean", "DateTime"};
  const std::vector<std::string> ops = {"+", "-", "*", "%", "==", "!=", "<", ">", "<=", ">=", "&&", "||"};
  auto defined = [](const std::string& op, const std::string& a, const std::string& b) -> std::string {
    if (op == "+") {
      if (a == "int" && b == "int") return "int";
      if ((a == "String" && (b == "String" || b == "int")) || (a == "int" && b == "String")) return "String";
      return "";
    }
    if (op == "-" || op == "*" || op == "%") return a == "int" && b == "int" ? "int" : "";
    if (op == "==" || op == "!=") return a == b ? "boolean" : "";
    if (op == "&&" || op == "||") return a == "boolean" && b == "boolean" ? "boolean" : "";
    return a == b && a != "boolean" ? "boolean" : "";
  };
  int checked = 0;
  for (const auto& op : ops) {
    for (const auto& a : types) {
      for (const auto& b : types) {
        CAPTURE(op);
        CAPTURE(a);
        CAPTURE(b);
        auto c = run("operation f(" + a + " x, " + b + " y) { var r = x " + op + " y; return r; }");
        REQUIRE(c.parse.empty());
        std::string want = defined(op, a, b);
        if (want.empty()) {
          REQUIRE(c.check.size() == 1);
          CHECK(c.check[0].code == DiagCode::OperatorUndefined);
        } else {
          CHECK(c.check.empty());
          const auto& op_decl = c.module.operations[0];
          const auto& var = std::get<VarStmt>(op_decl.body[0].node);
          CHECK(var.init->type.to_string() == want);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 12 * 16);
}

TEST_CASE("distinct codes for distinct failures") {
  CHECK(error_codes(run("entity A {} entity A {}").check) ==
        std::vector<DiagCode>{DiagCode::DuplicateDeclaration});
  CHECK(error_codes(run("operation f() { x = 1; }").check) ==
        std::vector<DiagCode>{DiagCode::UnresolvedName});
  CHECK(error_codes(run("widget slider w() {}").check) ==
        std::vector<DiagCode>{DiagCode::UnknownWidgetKind});
  CHECK(error_codes(run("touch wiggle w() {}").check) ==
        std::vector<DiagCode>{DiagCode::UnknownTouchKind});
  CHECK(error_codes(run("var s = \"a\"; operation f() { s = 1; }").check) ==
        std::vector<DiagCode>{DiagCode::TypeMismatch});
  CHECK(error_codes(run("entity T { Foo x; }").check) ==
        std::vector<DiagCode>{DiagCode::UnresolvedType});
  CHECK(error_codes(run("entity T { int x; } operation f(T t) { t.y = 1; }").check) ==
        std::vector<DiagCode>{DiagCode::UnknownMember});
  CHECK(error_codes(run("operation f() { if (1) { } }").check) ==
        std::vector<DiagCode>{DiagCode::NotBoolean});
  CHECK(error_codes(run("operation f() { foreach (x in 3) { } }").check) ==
        std::vector<DiagCode>{DiagCode::NotIterable});
  CHECK(error_codes(run("operation f() { var s = \"a\"; s(); }").check) ==
        std::vector<DiagCode>{DiagCode::NotCallable});
  CHECK(error_codes(run("operation g(int a) {} operation f() { g(); }").check) ==
        std::vector<DiagCode>{DiagCode::ArityMismatch});
  CHECK(error_codes(run("screen s { return 1; }").check) ==
        std::vector<DiagCode>{DiagCode::ReturnOutsideOperation});
  CHECK(error_codes(run("operation g() {} operation f() { g = 1; }").check) ==
        std::vector<DiagCode>{DiagCode::NotAssignable});
  CHECK(error_codes(run("var x = 1; screen s { when (x > 1) header(\"a\"); }").check) ==
        std::vector<DiagCode>{DiagCode::InvalidContext});
  CHECK(error_codes(run("screen s { header(\"a\"); header(\"b\"); }").check) ==
        std::vector<DiagCode>{DiagCode::MultipleHeaders});
  CHECK(error_codes(run("async operation f(String s) {}").check) ==
        std::vector<DiagCode>{DiagCode::AsyncCallback});
  CHECK(error_codes(run("screen s { button { \"go\", new nowhere(); } }").check) ==
        std::vector<DiagCode>{DiagCode::UnknownScreen});
  CHECK(error_codes(run("screen s { button { \"go\", navigate(\"nowhere\"); } }").check) ==
        std::vector<DiagCode>{DiagCode::UnknownScreen});
}

TEST_CASE("names are unique per kind only") {
  auto c = run("entity approveTask { String a; }\noperation approveTask() {}\nscreen approveTask {}");
  CHECK(c.check.empty());
}

TEST_CASE("remote data without import is a warning") {
  auto c = run("var data = httpRequest(\"/tasks\");");
  REQUIRE(c.check.size() == 1);
  CHECK(c.check[0].severity == Severity::Warning);
  CHECK(c.check[0].code == DiagCode::MissingImport);
  CHECK_FALSE(has_errors(c.check));

  auto ok = run("var data; operation import(String u) { data = httpRequest(u); }");
  CHECK(ok.check.empty());
}

TEST_CASE("membership test on strings and lists") {
  auto c = run(muit::test::corpus("data_model.muit"));
  REQUIRE(error_codes(c.check).empty());
  const auto* op = c.module.find_operation("searchTask");
  const auto& ifs = std::get<IfStmt>(op->body[0].node);
  CHECK(ifs.branches[0].condition.type == SemType::boolean());
}

TEST_CASE("entity string coerces to entity at call sites") {
  auto c = run("entity Task { String name; } operation approve(Task t) {}\n"
               "var n = \"x\"; screen s { button { \"ok\", approve(n); } }");
  CHECK(c.check.empty());
  auto bad = run("entity Task { String name; } operation approve(Task t) {}\n"
                 "screen s { button { \"ok\", approve(3); } }");
  CHECK(error_codes(bad.check) == std::vector<DiagCode>{DiagCode::TypeMismatch});
}

TEST_CASE("every expression is annotated") {
  auto c = run(muit::test::corpus("coverage.muit"));
  REQUIRE(error_codes(c.check).empty());
  int untyped = 0;
  for (const auto& op : c.module.operations) {
    for (const auto& s : op.body) {
      for_each_expr(s, [&](const Expr& e) {
        if (e.type.is(SemType::Kind::Unknown)) ++untyped;
      });
    }
  }
  CHECK(untyped == 0);
}

TEST_CASE("diagnostic formatting") {
  auto c = run("\n  screen s { import(c9); }");
  REQUIRE(c.check.size() == 1);
  CHECK(format(c.check[0], "a.muit") == "a.muit:2:21: error: unresolved widget 'c9'");
}
