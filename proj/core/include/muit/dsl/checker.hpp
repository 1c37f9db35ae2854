#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "muit/dsl/ast.hpp"

namespace muit::dsl {

// Name resolution and type checking. Annotates every expression, parameter,
// property and global with its resolved type. The module is compilable iff
// the result holds no errors.
Diagnostics check(DslModule& module);

std::span<const std::string_view> widget_kinds();
std::span<const std::string_view> touch_kinds();
bool is_widget_kind(std::string_view kind);
bool is_touch_kind(std::string_view kind);

// Dotted paths readable inside `when`/`where` conditions, e.g.
// "screen.window.innerWidth".
std::span<const std::string_view> context_variables();

// Resolves a syntactic type against the module's entities. Returns Unknown
// for names that are neither primitive nor declared.
SemType resolve_type(const TypeRef& ref, const DslModule& module);

// Result type of `lhs op rhs`, or Unknown when the operator is undefined for
// the operand types.
SemType binary_result(BinaryOp op, const SemType& lhs, const SemType& rhs);

// Whether a value of type `value` may be stored into / passed as `target`.
bool assignable_to(const SemType& value, const SemType& target);

// Members exposed by a widget or touch: variables assigned in its body and
// names bound through markup attributes.
std::vector<std::string> widget_members(const WidgetDecl& widget);

}  // namespace muit::dsl
