#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace muit::dsl {

struct SourceLocation {
  std::uint32_t offset = 0;
  std::uint32_t line = 1;    // 1-based
  std::uint32_t column = 1;  // 1-based, in bytes
  std::uint32_t length = 0;
};

enum class Severity { Error, Warning };

enum class DiagCode {
  // lexical
  UnterminatedString,
  UnknownCharacter,
  InvalidEscape,
  IntegerOverflow,
  // syntactic
  UnexpectedToken,
  ExpectedToken,
  NestingTooDeep,
  // semantic
  DuplicateDeclaration,
  UnresolvedName,
  UnresolvedWidget,
  UnresolvedType,
  UnknownWidgetKind,
  UnknownTouchKind,
  UnknownMember,
  TypeMismatch,
  OperatorUndefined,
  NotBoolean,
  NotIterable,
  NotCallable,
  ArityMismatch,
  ReturnOutsideOperation,
  NotAssignable,
  InvalidContext,
  MultipleHeaders,
  AsyncCallback,
  MissingImport,
  UnknownScreen,
};

std::string_view to_string(DiagCode code);
std::string_view to_string(Severity severity);

struct Diagnostic {
  Severity severity = Severity::Error;
  DiagCode code = DiagCode::UnexpectedToken;
  std::string message;
  SourceLocation location;
};

using Diagnostics = std::vector<Diagnostic>;

// `file:line:col: severity: message`
std::string format(const Diagnostic& diag, std::string_view file);

bool has_errors(const Diagnostics& diags);
std::size_t count_errors(const Diagnostics& diags);

}  // namespace muit::dsl
