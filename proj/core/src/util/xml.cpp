#include "muit/util/xml.hpp"

#include <cctype>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace muit::xml {

namespace pt = boost::property_tree;

namespace {

std::pair<std::string, std::string> split(std::string_view qname) {
  auto colon = qname.find(':');
  if (colon == std::string_view::npos) return {"", std::string(qname)};
  return {std::string(qname.substr(0, colon)), std::string(qname.substr(colon + 1))};
}

// rapidxml recurses per element and, as configured by ptree, does not
// check that end tags match. Both are handled by this pre-scan.
void check_structure(std::string_view doc, std::size_t max_depth) {
  std::vector<std::string_view> open;
  auto skip_to = [&](std::size_t from, std::string_view end) {
    auto at = doc.find(end, from);
    if (at == std::string_view::npos) throw ParseError("malformed XML: unterminated markup");
    return at + end.size();
  };
  auto is_name = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.' ||
           static_cast<unsigned char>(c) >= 0x80;
  };
  std::size_t i = 0;
  while ((i = doc.find('<', i)) != std::string_view::npos) {
    std::string_view rest = doc.substr(i);
    if (rest.starts_with("<!--")) {
      i = skip_to(i + 4, "-->");
    } else if (rest.starts_with("<![CDATA[")) {
      i = skip_to(i + 9, "]]>");
    } else if (rest.starts_with("<?")) {
      i = skip_to(i + 2, "?>");
    } else if (rest.starts_with("<!")) {
      auto gt = doc.find('>', i);
      auto br = doc.find('[', i);
      i = (br != std::string_view::npos && br < gt) ? skip_to(br, "]>") : skip_to(i, ">");
    } else if (rest.starts_with("</")) {
      std::size_t b = i + 2, e = b;
      while (e < doc.size() && is_name(doc[e])) ++e;
      std::string_view name = doc.substr(b, e - b);
      if (open.empty() || open.back() != name) {
        throw ParseError("malformed XML: unexpected end tag </" + std::string(name) + ">");
      }
      open.pop_back();
      i = skip_to(e, ">");
    } else {
      std::size_t b = i + 1, e = b;
      while (e < doc.size() && is_name(doc[e])) ++e;
      if (e == b) throw ParseError("malformed XML: bad start tag");
      std::string_view name = doc.substr(b, e - b);
      char quote = 0;
      std::size_t j = e;
      for (; j < doc.size(); ++j) {
        char c = doc[j];
        if (quote) {
          if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
          quote = c;
        } else if (c == '>') {
          break;
        }
      }
      if (j >= doc.size()) throw ParseError("malformed XML: unterminated start tag");
      if (doc[j - 1] != '/') {
        open.push_back(name);
        if (open.size() > max_depth) {
          throw ParseError("XML nesting deeper than " + std::to_string(max_depth));
        }
      }
      i = j + 1;
    }
  }
  if (!open.empty()) throw ParseError("malformed XML: unclosed <" + std::string(open.back()) + ">");
}

Element convert(const std::string& name, const pt::ptree& node, std::shared_ptr<const Scope> parent) {
  Element e;
  e.name = name;
  auto attrs = node.get_child_optional("<xmlattr>");
  std::shared_ptr<const Scope> scope = parent;
  if (attrs) {
    Scope local;
    bool declares = false;
    for (const auto& [k, v] : *attrs) {
      e.attributes.emplace_back(k, v.data());
      if (k == "xmlns") {
        if (!declares) local = *parent, declares = true;
        local[""] = v.data();
      } else if (k.rfind("xmlns:", 0) == 0) {
        if (!declares) local = *parent, declares = true;
        local[k.substr(6)] = v.data();
      }
    }
    if (declares) scope = std::make_shared<const Scope>(std::move(local));
  }
  e.scope = scope;
  auto [prefix, local] = split(name);
  e.prefix = std::move(prefix);
  e.local = std::move(local);
  if (auto it = scope->find(e.prefix); it != scope->end()) e.ns = it->second;
  e.text = node.data();
  for (const auto& [k, v] : node) {
    if (k.empty() || k[0] == '<') continue;  // <xmlattr>, <xmlcomment>, <xmltext>
    e.children.push_back(convert(k, v, scope));
  }
  return e;
}

}  // namespace

const std::string* Element::attr(std::string_view n) const {
  for (const auto& [k, v] : attributes)
    if (k == n) return &v;
  return nullptr;
}

std::string Element::attr_or(std::string_view n, std::string fallback) const {
  const auto* v = attr(n);
  return v ? *v : std::move(fallback);
}

const Element* Element::child(std::string_view uri, std::string_view n) const {
  for (const auto& c : children)
    if (c.is(uri, n)) return &c;
  return nullptr;
}

std::vector<const Element*> Element::all(std::string_view uri, std::string_view n) const {
  std::vector<const Element*> out;
  for (const auto& c : children)
    if (c.is(uri, n)) out.push_back(&c);
  return out;
}

QName Element::resolve(std::string_view qname) const {
  auto [prefix, local] = split(qname);
  QName q{"", std::move(local)};
  if (scope) {
    if (auto it = scope->find(prefix); it != scope->end()) q.ns = it->second;
  }
  return q;
}

std::string Element::trimmed_text() const { return trim(text); }

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Element parse(std::string_view document, std::size_t max_depth) {
  check_structure(document, max_depth);
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& err) {
    throw ParseError("malformed XML: " + err.message() + " at line " + std::to_string(err.line()));
  }
  const pt::ptree::value_type* root = nullptr;
  for (const auto& kv : tree) {
    if (!kv.first.empty() && kv.first[0] == '<') continue;
    if (root) throw ParseError("malformed XML: more than one root element");
    root = &kv;
  }
  if (!root) throw ParseError("malformed XML: no root element");
  auto base = std::make_shared<const Scope>(Scope{{"xml", "http://www.w3.org/XML/1998/namespace"}});
  return convert(root->first, root->second, base);
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace muit::xml
