#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "muit/dsl/ast.hpp"
#include "muit/dsl/token.hpp"

namespace muit::dsl {

struct ParseResult {
  DslModule module;
  Diagnostics diagnostics;
};

// Builds a module from a token stream. Syntax errors are reported and the
// parser resynchronises at the next top-level declaration keyword, so later
// declarations are still parsed.
ParseResult parse(const std::vector<Token>& tokens, std::string module_name = "main");

// tokenize + parse, with lexical diagnostics merged in source order.
ParseResult parse_source(std::string_view source, std::string module_name = "main");

// Tags accepted in the `tag(...)` element form (the `tag { ... }` and markup
// forms accept any identifier).
bool is_element_tag(std::string_view name);

// Canonical source rendering. Reparsing the output yields a structurally
// equal module.
std::string print(const DslModule& module);
std::string print(const Expr& expr);

}  // namespace muit::dsl
