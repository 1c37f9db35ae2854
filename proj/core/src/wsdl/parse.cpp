#include <algorithm>
#include <functional>
#include <regex>
#include <set>

#include "muit/util/xml.hpp"
#include "muit/wsdl/wsdl.hpp"

namespace muit::wsdl {

namespace {

using xml::Element;

// Top-level schema components, keyed by local name.
struct SchemaIndex {
  struct Entry {
    const Element* node;
    std::string tns;
    bool qualified;
  };
  std::map<std::string, Entry> elements;
  std::map<std::string, Entry> complex_types;
  std::map<std::string, std::string> simple_types;  // name -> builtin base
};

bool occurs_many(const Element& e) {
  std::string max = e.attr_or("maxOccurs", "1");
  if (max == "unbounded") return true;
  try {
    return std::stoll(max) > 1;
  } catch (const std::exception&) {
    return false;
  }
}

class Reader {
 public:
  explicit Reader(WsdlDescription& d) : d_(d) {}

  void index_schema(const Element& schema, const std::string& fallback_tns) {
    std::string tns = schema.attr_or("targetNamespace", fallback_tns);
    bool qualified = schema.attr_or("elementFormDefault") == "qualified";
    for (const auto& c : schema.children) {
      if (c.ns != kXsdNs) continue;
      std::string name = c.attr_or("name");
      if (c.local == "element") {
        index_.elements[name] = {&c, tns, qualified};
      } else if (c.local == "complexType") {
        index_.complex_types[name] = {&c, tns, qualified};
      } else if (c.local == "simpleType") {
        const Element* r = c.child(kXsdNs, "restriction");
        index_.simple_types[name] = r ? c.resolve(r->attr_or("base")).local : "string";
      } else if (c.local == "import" || c.local == "include") {
        d_.warnings.push_back("schema " + c.local + " ignored");
      }
    }
  }

  void build_complex_types() {
    for (const auto& [name, entry] : index_.complex_types) {
      ComplexType t;
      t.name = name;
      t.fields = content(*entry.node, entry);
      d_.complex_types[name] = std::move(t);
    }
  }

  SchemaField top_element(const xml::QName& q) {
    auto it = index_.elements.find(q.local);
    if (it == index_.elements.end()) {
      throw WsdlError(WsdlErrc::UndefinedSchemaComponent, "element '" + q.local + "' is not defined in the types section");
    }
    SchemaField f = element(*it->second.node, it->second);
    f.ns = it->second.tns;
    return f;
  }

  SchemaField typed(const std::string& name, const xml::QName& type, const Element& at) {
    SchemaField f;
    f.name = name;
    assign_type(f, type, at);
    return f;
  }

 private:
  void assign_type(SchemaField& f, const xml::QName& type, const Element& at) {
    (void)at;
    if (type.ns == kXsdNs) {
      f.xsd_type = type.local;
    } else if (index_.complex_types.count(type.local)) {
      f.type_name = type.local;
    } else if (auto s = index_.simple_types.find(type.local); s != index_.simple_types.end()) {
      f.xsd_type = s->second;
    } else {
      throw WsdlError(WsdlErrc::UndefinedSchemaComponent, "type '" + type.local + "' is not defined");
    }
  }

  SchemaField element(const Element& e, const SchemaIndex::Entry& scope) {
    if (const auto* ref = e.attr("ref")) {
      SchemaField f = top_element(e.resolve(*ref));
      f.repeated = occurs_many(e);
      f.optional = e.attr_or("minOccurs", "1") == "0";
      return f;
    }
    if (++depth_ > 64) throw WsdlError(WsdlErrc::UnmappableType, "anonymous types nested too deeply");
    SchemaField f;
    f.name = e.attr_or("name");
    f.ns = scope.qualified ? scope.tns : "";
    f.repeated = occurs_many(e);
    f.optional = e.attr_or("minOccurs", "1") == "0";
    if (const auto* t = e.attr("type")) {
      assign_type(f, e.resolve(*t), e);
    } else if (const Element* ct = e.child(kXsdNs, "complexType")) {
      f.children = content(*ct, scope);
    } else if (const Element* st = e.child(kXsdNs, "simpleType")) {
      const Element* r = st->child(kXsdNs, "restriction");
      f.xsd_type = r ? st->resolve(r->attr_or("base")).local : "string";
    } else {
      f.xsd_type = "anyType";
    }
    --depth_;
    return f;
  }

  std::vector<SchemaField> content(const Element& type, const SchemaIndex::Entry& scope) {
    std::vector<SchemaField> out;
    std::function<void(const Element&)> walk = [&](const Element& node) {
      for (const auto& c : node.children) {
        if (c.ns != kXsdNs) continue;
        if (c.local == "element") {
          out.push_back(element(c, scope));
        } else if (c.local == "sequence" || c.local == "all" || c.local == "choice") {
          walk(c);
        } else if (c.local == "complexContent" || c.local == "simpleContent") {
          for (const auto& ext : c.children) {
            if (ext.local != "extension" && ext.local != "restriction") continue;
            auto base = ext.resolve(ext.attr_or("base"));
            if (base.ns != kXsdNs && index_.complex_types.count(base.local)) {
              const auto& b = index_.complex_types.at(base.local);
              auto inherited = content(*b.node, b);
              out.insert(out.end(), inherited.begin(), inherited.end());
            }
            walk(ext);
          }
        } else if (c.local == "attribute" || c.local == "anyAttribute") {
          d_.warnings.push_back("attribute '" + c.attr_or("name", c.attr_or("ref")) + "' in schema ignored");
        } else if (c.local == "any") {
          d_.warnings.push_back("xs:any wildcard ignored");
        }
      }
    };
    walk(type);
    return out;
  }

 public:
  SchemaIndex index_;

 private:
  WsdlDescription& d_;
  int depth_ = 0;
};

bool valid_url(const std::string& url) {
  static const std::regex re(R"(^https?://[A-Za-z0-9._~%-]+(:[0-9]{1,5})?(/[^\s]*)?$)");
  return std::regex_match(url, re);
}

bool is_policy(const Element& e) {
  return e.local == "Policy" || e.local == "PolicyReference" || e.ns.find("ws-policy") != std::string::npos ||
         e.ns.find("/policy") != std::string::npos;
}

void scan_unsupported(const Element& e, std::vector<std::string>& warnings, std::set<std::string>& seen) {
  for (const auto& c : e.children) {
    std::string what;
    if (is_policy(c)) {
      what = "WS-Policy assertions ignored";
    } else if (c.ns == kWsdlNs && c.local == "import") {
      what = "wsdl:import of '" + c.attr_or("location") + "' not followed";
    }
    if (!what.empty()) {
      if (seen.insert(what).second) warnings.push_back(what);
      continue;
    }
    scan_unsupported(c, warnings, seen);
  }
}

const Element* find_descendant(const Element& e, std::string_view ns, std::string_view local) {
  for (const auto& c : e.children) {
    if (c.is(ns, local)) return &c;
    if (const auto* d = find_descendant(c, ns, local)) return d;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(WsdlErrc code) {
  switch (code) {
    case WsdlErrc::MalformedXml: return "malformed-xml";
    case WsdlErrc::NotWsdl: return "not-wsdl";
    case WsdlErrc::MissingPortType: return "missing-port-type";
    case WsdlErrc::MissingAddress: return "missing-address";
    case WsdlErrc::InvalidAddress: return "invalid-address";
    case WsdlErrc::UndefinedMessage: return "undefined-message";
    case WsdlErrc::UndefinedSchemaComponent: return "undefined-schema-component";
    case WsdlErrc::UnsupportedStyle: return "unsupported-style";
    case WsdlErrc::UnmappableType: return "unmappable-type";
  }
  return "unknown";
}

const Message* WsdlDescription::find_message(std::string_view name) const {
  for (const auto& m : messages)
    if (m.name == name) return &m;
  return nullptr;
}

const PortOperation* WsdlDescription::find_operation(std::string_view name) const {
  for (const auto& o : operations)
    if (o.name == name) return &o;
  return nullptr;
}

const std::vector<SchemaField>& WsdlDescription::fields_of(const SchemaField& field) const {
  if (!field.type_name.empty()) {
    auto it = complex_types.find(field.type_name);
    if (it != complex_types.end()) return it->second.fields;
  }
  return field.children;
}

std::vector<SchemaField> WsdlDescription::message_fields(const Message& message) const {
  if (message.parts.size() == 1 && !message.parts.front().element.simple()) {
    return fields_of(message.parts.front().element);
  }
  std::vector<SchemaField> out;
  for (const auto& p : message.parts) out.push_back(p.element);
  return out;
}

WsdlDescription parse_wsdl(std::string_view document) {
  Element root;
  try {
    root = xml::parse(document);
  } catch (const xml::ParseError& e) {
    throw WsdlError(WsdlErrc::MalformedXml, e.what());
  }
  if (!root.is(kWsdlNs, "definitions")) {
    throw WsdlError(WsdlErrc::NotWsdl, "root element <" + root.name + "> is not a WSDL 1.1 definitions element");
  }

  WsdlDescription d;
  Reader reader(d);
  d.target_namespace = root.attr_or("targetNamespace");
  d.service_name = root.attr_or("name");
  std::set<std::string> seen;
  scan_unsupported(root, d.warnings, seen);

  for (const auto* types : root.all(kWsdlNs, "types")) {
    for (const auto* schema : types->all(kXsdNs, "schema")) reader.index_schema(*schema, d.target_namespace);
  }
  reader.build_complex_types();

  for (const auto* m : root.all(kWsdlNs, "message")) {
    Message msg;
    msg.name = m->attr_or("name");
    for (const auto* p : m->all(kWsdlNs, "part")) {
      MessagePart part;
      part.name = p->attr_or("name");
      if (const auto* el = p->attr("element")) {
        part.element = reader.top_element(p->resolve(*el));
      } else if (const auto* ty = p->attr("type")) {
        part.element = reader.typed(part.name, p->resolve(*ty), *p);
      } else {
        throw WsdlError(WsdlErrc::UndefinedSchemaComponent,
                        "part '" + part.name + "' of message '" + msg.name + "' has neither element nor type");
      }
      msg.parts.push_back(std::move(part));
    }
    d.messages.push_back(std::move(msg));
  }

  auto port_types = root.all(kWsdlNs, "portType");
  if (port_types.empty()) throw WsdlError(WsdlErrc::MissingPortType, "no wsdl:portType");
  if (port_types.size() > 1) d.warnings.push_back("only the first portType is used");
  const Element& pt = *port_types.front();
  d.port_type = pt.attr_or("name");
  auto message_ref = [&](const Element& op, const char* dir) -> std::string {
    const Element* io = op.child(kWsdlNs, dir);
    if (!io) return {};
    std::string name = io->resolve(io->attr_or("message")).local;
    if (!d.find_message(name)) {
      throw WsdlError(WsdlErrc::UndefinedMessage,
                      "operation '" + op.attr_or("name") + "' refers to undefined message '" + name + "'");
    }
    return name;
  };
  for (const auto* op : pt.all(kWsdlNs, "operation")) {
    PortOperation o;
    o.name = op->attr_or("name");
    o.input = message_ref(*op, "input");
    if (o.input.empty()) throw WsdlError(WsdlErrc::UndefinedMessage, "operation '" + o.name + "' has no input message");
    o.output = message_ref(*op, "output");
    d.operations.push_back(std::move(o));
  }
  if (d.operations.empty()) d.warnings.push_back("portType '" + d.port_type + "' declares no operations");

  const Element* binding = nullptr;
  auto bindings = root.all(kWsdlNs, "binding");
  for (const auto* b : bindings) {
    if (b->resolve(b->attr_or("type")).local == d.port_type) binding = b;
  }
  if (!binding && !bindings.empty()) {
    binding = bindings.front();
    d.warnings.push_back("binding '" + binding->attr_or("name") + "' names portType '" +
                         binding->resolve(binding->attr_or("type")).local + "', using '" + d.port_type + "'");
  }
  if (binding) {
    d.binding = binding->attr_or("name");
    if (const auto* sb = binding->child(kSoapBindingNs, "binding")) d.style = sb->attr_or("style", "document");
    if (d.style != "document") throw WsdlError(WsdlErrc::UnsupportedStyle, d.style + " style bindings are not supported");
    for (const auto* bop : binding->all(kWsdlNs, "operation")) {
      std::string name = bop->attr_or("name");
      const Element* so = bop->child(kSoapBindingNs, "operation");
      if (so && so->attr_or("style", "document") != "document") {
        throw WsdlError(WsdlErrc::UnsupportedStyle, "operation '" + name + "' uses " + so->attr_or("style") + " style");
      }
      for (const char* dir : {"input", "output"}) {
        const Element* io = bop->child(kWsdlNs, dir);
        const Element* body = io ? io->child(kSoapBindingNs, "body") : nullptr;
        if (body && body->attr_or("use", "literal") != "literal") {
          throw WsdlError(WsdlErrc::UnsupportedStyle, "operation '" + name + "' uses " + body->attr_or("use") + " encoding");
        }
      }
      for (auto& o : d.operations) {
        if (o.name == name && so) o.soap_action = so->attr_or("soapAction");
      }
    }
  } else {
    d.warnings.push_back("no SOAP binding; assuming document/literal");
  }

  const Element* address = nullptr;
  for (const auto* svc : root.all(kWsdlNs, "service")) {
    if (d.service_name.empty()) d.service_name = svc->attr_or("name");
    for (const auto* port : svc->all(kWsdlNs, "port")) {
      if (!address) address = port->child(kSoapBindingNs, "address");
    }
  }
  if (!address) address = find_descendant(root, kSoapBindingNs, "address");
  if (!address || !address->attr("location")) throw WsdlError(WsdlErrc::MissingAddress, "no soap:address location");
  d.address = *address->attr("location");
  if (!valid_url(d.address)) throw WsdlError(WsdlErrc::InvalidAddress, "port address '" + d.address + "' is not a valid URL");
  if (d.service_name.empty()) d.service_name = d.port_type;
  return d;
}

}  // namespace muit::wsdl
