#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace muit::xml {

struct QName {
  std::string ns;
  std::string local;
  friend bool operator==(const QName&, const QName&) = default;
};

using Scope = std::map<std::string, std::string, std::less<>>;

// Namespace-resolved element tree. Text is the concatenation of the
// element's character data; mixed content is not preserved.
struct Element {
  std::string name;  // as written, e.g. "wsdl:message"
  std::string prefix;
  std::string local;
  std::string ns;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<Element> children;
  std::shared_ptr<const Scope> scope;

  bool is(std::string_view uri, std::string_view name) const { return ns == uri && local == name; }
  const std::string* attr(std::string_view name) const;
  std::string attr_or(std::string_view name, std::string fallback = {}) const;
  const Element* child(std::string_view uri, std::string_view name) const;
  std::vector<const Element*> all(std::string_view uri, std::string_view name) const;
  // Resolves a QName-valued attribute such as "tns:Task" against the
  // in-scope declarations. Unbound prefixes resolve to an empty namespace.
  QName resolve(std::string_view qname) const;
  std::string trimmed_text() const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses a document with exactly one root element. Throws ParseError on
// malformed input or nesting deeper than `max_depth`.
Element parse(std::string_view document, std::size_t max_depth = 128);

std::string escape(std::string_view text);
std::string trim(std::string_view text);

}  // namespace muit::xml
