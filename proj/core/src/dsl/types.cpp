#include "muit/dsl/types.hpp"

namespace muit::dsl {

std::string SemType::to_string() const {
  switch (kind) {
    case Kind::Unknown: return "?";
    case Kind::Any: return "Any";
    case Kind::Void: return "void";
    case Kind::String: return "String";
    case Kind::Int: return "int";
    case Kind::Boolean: return "boolean";
    case Kind::DateTime: return "DateTime";
    case Kind::Entity: return name;
    case Kind::List: return "List<" + (element ? element->to_string() : std::string("Any")) + ">";
    case Kind::Screen: return name.empty() ? "Screen" : "Screen " + name;
    case Kind::Operation: return name.empty() ? "Operation" : "Operation " + name;
    case Kind::Widget: return name.empty() ? "Widget" : "Widget " + name;
    case Kind::Touch: return name.empty() ? "Touch" : "Touch " + name;
    case Kind::Callback: return "callback";
    case Kind::Function: return "function";
    case Kind::Namespace: return name;
    case Kind::Block: return "block";
  }
  return "?";
}

bool operator==(const SemType& a, const SemType& b) {
  if (a.kind != b.kind || a.name != b.name) return false;
  if (a.kind != SemType::Kind::List) return true;
  if (!a.element || !b.element) return !a.element && !b.element;
  return *a.element == *b.element;
}

}  // namespace muit::dsl
