#include "muit/dsl/diagnostic.hpp"

#include <algorithm>

namespace muit::dsl {

std::string_view to_string(DiagCode code) {
  switch (code) {
    case DiagCode::UnterminatedString: return "unterminated-string";
    case DiagCode::UnknownCharacter: return "unknown-character";
    case DiagCode::InvalidEscape: return "invalid-escape";
    case DiagCode::IntegerOverflow: return "integer-overflow";
    case DiagCode::UnexpectedToken: return "unexpected-token";
    case DiagCode::ExpectedToken: return "expected-token";
    case DiagCode::NestingTooDeep: return "nesting-too-deep";
    case DiagCode::DuplicateDeclaration: return "duplicate-declaration";
    case DiagCode::UnresolvedName: return "unresolved-name";
    case DiagCode::UnresolvedWidget: return "unresolved-widget";
    case DiagCode::UnresolvedType: return "unresolved-type";
    case DiagCode::UnknownWidgetKind: return "unknown-widget-kind";
    case DiagCode::UnknownTouchKind: return "unknown-touch-kind";
    case DiagCode::UnknownMember: return "unknown-member";
    case DiagCode::TypeMismatch: return "type-mismatch";
    case DiagCode::OperatorUndefined: return "operator-undefined";
    case DiagCode::NotBoolean: return "not-boolean";
    case DiagCode::NotIterable: return "not-iterable";
    case DiagCode::NotCallable: return "not-callable";
    case DiagCode::ArityMismatch: return "arity-mismatch";
    case DiagCode::ReturnOutsideOperation: return "return-outside-operation";
    case DiagCode::NotAssignable: return "not-assignable";
    case DiagCode::InvalidContext: return "invalid-context";
    case DiagCode::MultipleHeaders: return "multiple-headers";
    case DiagCode::AsyncCallback: return "async-callback";
    case DiagCode::MissingImport: return "missing-import";
    case DiagCode::UnknownScreen: return "unknown-screen";
  }
  return "unknown";
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

std::string format(const Diagnostic& diag, std::string_view file) {
  std::string out;
  out.reserve(file.size() + diag.message.size() + 32);
  out.append(file);
  out += ':';
  out += std::to_string(diag.location.line);
  out += ':';
  out += std::to_string(diag.location.column);
  out += ": ";
  out.append(to_string(diag.severity));
  out += ": ";
  out += diag.message;
  return out;
}

bool has_errors(const Diagnostics& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Severity::Error;
  });
}

std::size_t count_errors(const Diagnostics& diags) {
  return static_cast<std::size_t>(std::count_if(
      diags.begin(), diags.end(),
      [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

}  // namespace muit::dsl
