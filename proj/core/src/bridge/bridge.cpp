#include "muit/bridge/bridge.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "muit/util/xml.hpp"

namespace muit::bridge {

using nlohmann::json;

namespace {

constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

std::string dump(const json& v) { return v.dump(-1, ' ', false, json::error_handler_t::replace); }

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

XmlNode convert(const xml::Element& e) {
  XmlNode n;
  n.ns = e.ns;
  n.local = e.local;
  for (const auto& [name, value] : e.attributes) {
    if (name == "xmlns" || name.rfind("xmlns:", 0) == 0) continue;
    XmlAttribute a;
    if (name.find(':') != std::string::npos) {
      auto q = e.resolve(name);
      a.ns = q.ns;
      a.local = q.local;
    } else {
      a.local = name;
    }
    a.value = value;
    n.attributes.push_back(std::move(a));
  }
  n.children.reserve(e.children.size());
  for (const auto& c : e.children) n.children.push_back(convert(c));
  // Indentation between child elements is not content.
  n.text = n.children.empty() ? e.text : xml::trim(e.text);
  return n;
}

bool encoded(const XmlNode& n) {
  for (const auto& a : n.attributes) {
    if (a.local == "encodingStyle" && (a.ns == kSoap11Ns || a.ns.empty())) return true;
  }
  for (const auto& c : n.children) {
    if (encoded(c)) return true;
  }
  return false;
}

const XmlAttribute* find_attr(const XmlNode& n, std::string_view ns, std::string_view local) {
  for (const auto& a : n.attributes) {
    if (a.ns == ns && a.local == local) return &a;
  }
  return nullptr;
}

class Writer {
 public:
  explicit Writer(const SoapEnvelope& env) {
    prefixes_[std::string(kXmlNs)] = "xml";
    taken_.insert("xml");
    for (const auto& [prefix, ns] : env.namespaces) {
      if (ns.empty() || prefix.empty() || prefixes_.count(ns) || taken_.count(prefix)) continue;
      prefixes_[ns] = prefix;
      taken_.insert(prefix);
    }
    assign(std::string(kSoap11Ns), "soapenv");
    for (const auto& h : env.headers) collect(h);
    collect(env.body);
  }

  std::string run(const SoapEnvelope& env) {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<" + q(std::string(kSoap11Ns), "Envelope");
    for (const auto& ns : order_) out_ += " xmlns:" + prefixes_[ns] + "=\"" + xml::escape(ns) + "\"";
    out_ += ">";
    if (!env.headers.empty()) {
      out_ += "<" + q(std::string(kSoap11Ns), "Header") + ">";
      for (const auto& h : env.headers) node(h);
      out_ += "</" + q(std::string(kSoap11Ns), "Header") + ">";
    }
    out_ += "<" + q(std::string(kSoap11Ns), "Body") + ">";
    node(env.body);
    out_ += "</" + q(std::string(kSoap11Ns), "Body") + "></" + q(std::string(kSoap11Ns), "Envelope") + ">";
    return std::move(out_);
  }

 private:
  void assign(const std::string& ns, const std::string& preferred) {
    if (ns.empty()) return;
    if (!prefixes_.count(ns)) {
      std::string p = preferred;
      for (int i = 1; p.empty() || taken_.count(p); ++i) p = "ns" + std::to_string(i);
      prefixes_[ns] = p;
      taken_.insert(p);
    }
    if (ns != kXmlNs && std::find(order_.begin(), order_.end(), ns) == order_.end()) order_.push_back(ns);
  }

  void collect(const XmlNode& n) {
    assign(n.ns, "");
    for (const auto& a : n.attributes) assign(a.ns, "");
    for (const auto& c : n.children) collect(c);
  }

  std::string q(const std::string& ns, const std::string& local) {
    return ns.empty() ? local : prefixes_.at(ns) + ":" + local;
  }

  void node(const XmlNode& n) {
    std::string name = q(n.ns, n.local);
    out_ += "<" + name;
    for (const auto& a : n.attributes) out_ += " " + q(a.ns, a.local) + "=\"" + xml::escape(a.value) + "\"";
    if (n.children.empty() && n.text.empty()) {
      out_ += "/>";
      return;
    }
    out_ += ">" + xml::escape(n.text);
    for (const auto& c : n.children) node(c);
    out_ += "</" + name + ">";
  }

  std::map<std::string, std::string> prefixes_;
  std::set<std::string> taken_;
  std::vector<std::string> order_;
  std::string out_;
};

std::string child_path(const std::string& path, const std::string& key) { return path + "." + key; }

std::string item_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

json leaf_value(const std::string& text, const wsdl::SchemaField* field, const std::string& path) {
  if (field && integral_xsd_type(field->xsd_type)) {
    std::string t = xml::trim(text);
    if (!t.empty() && t[0] == '+') t.erase(0, 1);
    std::int64_t v = 0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
      throw BridgeError(BridgeErrc::SchemaViolation, path, "expected an integer, got '" + text + "'");
    }
    return v;
  }
  return text;
}

class ToCanonical {
 public:
  explicit ToCanonical(const ServiceSchema* schema) : schema_(schema) {}

  json value(const XmlNode& n, const wsdl::SchemaField* field, const std::string& path) {
    if (const auto* nil = find_attr(n, kXsiNs, "nil"); nil && (nil->value == "true" || nil->value == "1")) {
      return nullptr;
    }
    bool complex = field ? !field->simple() : !n.children.empty();
    json obj = json::object();
    for (const auto& a : n.attributes) {
      if (a.ns == kXsiNs) continue;
      obj["@" + a.local] = a.value;
    }
    if (!n.children.empty() && !is_blank(n.text)) {
      throw BridgeError(BridgeErrc::MixedContent, path, "mixed text and element content in <" + n.local + ">");
    }
    if (!complex) {
      if (!n.children.empty()) {
        throw BridgeError(BridgeErrc::SchemaViolation, path, "simple element <" + n.local + "> has child elements");
      }
      json leaf = leaf_value(n.text, field, path);
      if (obj.empty()) return leaf;
      obj["#text"] = std::move(leaf);
      return obj;
    }
    if (field && !is_blank(n.text)) {
      throw BridgeError(BridgeErrc::SchemaViolation, path, "unexpected text in complex element <" + n.local + ">");
    }

    const std::vector<wsdl::SchemaField>* fields = field ? &schema_->children(*field) : nullptr;
    std::vector<std::string> order;
    std::map<std::string, std::vector<const XmlNode*>> groups;
    for (const auto& c : n.children) {
      if (!groups.count(c.local)) order.push_back(c.local);
      groups[c.local].push_back(&c);
    }
    for (const auto& key : order) {
      const auto& group = groups[key];
      const wsdl::SchemaField* sub = nullptr;
      std::string p = child_path(path, key);
      if (fields) {
        for (const auto& f : *fields) {
          if (f.name == key) sub = &f;
        }
        if (!sub || sub->ns != group.front()->ns) {
          throw BridgeError(BridgeErrc::SchemaViolation, p, "element <" + key + "> is not part of the schema");
        }
        if (!sub->repeated && group.size() > 1) {
          throw BridgeError(BridgeErrc::SchemaViolation, p, "element <" + key + "> may occur at most once");
        }
      }
      bool as_array = sub ? sub->repeated : group.size() > 1;
      if (as_array) {
        json arr = json::array();
        for (std::size_t i = 0; i < group.size(); ++i) arr.push_back(value(*group[i], sub, item_path(p, i)));
        obj[key] = std::move(arr);
      } else {
        obj[key] = value(*group.front(), sub, p);
      }
    }
    return obj;
  }

 private:
  const ServiceSchema* schema_;
};

class ToSoap {
 public:
  explicit ToSoap(const ServiceSchema* schema) : schema_(schema) {}

  XmlNode node(const std::string& ns, const std::string& local, const json& v, const wsdl::SchemaField* field,
               const std::string& path) {
    XmlNode n;
    n.ns = ns;
    n.local = local;
    if (v.is_null()) {
      n.attributes.push_back({std::string(kXsiNs), "nil", "true"});
      return n;
    }
    if (v.is_array()) throw BridgeError(BridgeErrc::SchemaViolation, path, "nested arrays are not representable");
    if (!v.is_object()) {
      if (field && !field->simple()) throw BridgeError(BridgeErrc::SchemaViolation, path, "expected an object");
      n.text = scalar(v, field, path);
      return n;
    }
    if (field && field->simple()) {
      // Attributes on a simple element: {"@a": ..., "#text": ...}
      for (const auto& [k, x] : v.items()) {
        if (k == "#text") n.text = scalar(x, field, path);
        else if (!k.empty() && k[0] == '@') n.attributes.push_back({"", k.substr(1), scalar(x, nullptr, child_path(path, k))});
        else throw BridgeError(BridgeErrc::SchemaViolation, child_path(path, k), "simple element has no children");
      }
      return n;
    }
    std::vector<std::string> keys;
    for (const auto& [k, x] : v.items()) {
      if (k == "#text") {
        n.text = scalar(x, nullptr, child_path(path, k));
      } else if (!k.empty() && k[0] == '@') {
        n.attributes.push_back({"", k.substr(1), scalar(x, nullptr, child_path(path, k))});
      } else {
        keys.push_back(k);
      }
    }
    if (field) {
      const auto& fields = schema_->children(*field);
      for (const auto& k : keys) {
        bool known = std::any_of(fields.begin(), fields.end(), [&](const wsdl::SchemaField& f) { return f.name == k; });
        if (!known) throw BridgeError(BridgeErrc::SchemaViolation, child_path(path, k), "field is not part of the schema");
      }
      for (const auto& f : fields) {
        if (v.contains(f.name)) emit(n, f.ns, f.name, v.at(f.name), &f, child_path(path, f.name));
      }
    } else {
      for (const auto& k : keys) emit(n, "", k, v.at(k), nullptr, child_path(path, k));
    }
    return n;
  }

 private:
  void emit(XmlNode& parent, const std::string& ns, const std::string& key, const json& v, const wsdl::SchemaField* f,
            const std::string& path) {
    if (v.is_array()) {
      if (f && !f->repeated) throw BridgeError(BridgeErrc::SchemaViolation, path, "field is not repeated");
      for (std::size_t i = 0; i < v.size(); ++i) parent.children.push_back(node(ns, key, v[i], f, item_path(path, i)));
    } else {
      parent.children.push_back(node(ns, key, v, f, path));
    }
  }

  std::string scalar(const json& v, const wsdl::SchemaField* field, const std::string& path) {
    if (field && integral_xsd_type(field->xsd_type) && !v.is_number_integer()) {
      throw BridgeError(BridgeErrc::SchemaViolation, path, "expected an integer");
    }
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw BridgeError(BridgeErrc::SchemaViolation, path, "expected a scalar");
  }

  const ServiceSchema* schema_;
};

void validate_value(const json& v, const ServiceSchema& schema, const wsdl::SchemaField& f, Completeness c,
                    const std::string& path);

void validate_fields(const json& obj, const ServiceSchema& schema, const std::vector<wsdl::SchemaField>& fields,
                     Completeness c, const std::string& path) {
  if (!obj.is_object()) throw BridgeError(BridgeErrc::SchemaViolation, path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    std::string p = child_path(path, k);
    if (!k.empty() && (k[0] == '@' || k == "#text")) {
      if (!v.is_primitive() || v.is_null()) throw BridgeError(BridgeErrc::SchemaViolation, p, "expected a scalar");
      continue;
    }
    const wsdl::SchemaField* f = nullptr;
    for (const auto& x : fields) {
      if (x.name == k) f = &x;
    }
    if (!f) throw BridgeError(BridgeErrc::SchemaViolation, p, "unknown field");
    if (f->repeated) {
      if (!v.is_array()) throw BridgeError(BridgeErrc::SchemaViolation, p, "expected an array");
      for (std::size_t i = 0; i < v.size(); ++i) validate_value(v[i], schema, *f, c, item_path(p, i));
    } else {
      validate_value(v, schema, *f, c, p);
    }
  }
  if (c == Completeness::Full) {
    for (const auto& f : fields) {
      if (!f.optional && !obj.contains(f.name)) {
        throw BridgeError(BridgeErrc::SchemaViolation, child_path(path, f.name), "required field is missing");
      }
    }
  }
}

void validate_value(const json& v, const ServiceSchema& schema, const wsdl::SchemaField& f, Completeness c,
                    const std::string& path) {
  if (v.is_null()) {
    if (!f.optional) throw BridgeError(BridgeErrc::SchemaViolation, path, "null for a required field");
    return;
  }
  if (!f.simple()) {
    validate_fields(v, schema, schema.children(f), c, path);
    return;
  }
  const json* leaf = &v;
  if (v.is_object()) {
    for (const auto& [k, x] : v.items()) {
      if (k == "#text") leaf = &x;
      else if (k.empty() || k[0] != '@') throw BridgeError(BridgeErrc::SchemaViolation, child_path(path, k), "unknown field");
    }
    if (leaf == &v) return;
  }
  if (integral_xsd_type(f.xsd_type)) {
    if (!leaf->is_number_integer()) throw BridgeError(BridgeErrc::SchemaViolation, path, "expected an integer");
  } else if (!leaf->is_string()) {
    throw BridgeError(BridgeErrc::SchemaViolation, path, "expected a string (" + f.xsd_type + ")");
  }
}

}  // namespace

std::string_view to_string(BridgeErrc code) {
  switch (code) {
    case BridgeErrc::MalformedXml: return "malformed-xml";
    case BridgeErrc::NotSoap11: return "not-soap-1.1";
    case BridgeErrc::MissingBody: return "missing-body";
    case BridgeErrc::MultipleBodyChildren: return "multiple-body-children";
    case BridgeErrc::RpcEncoded: return "rpc-encoded";
    case BridgeErrc::MixedContent: return "mixed-content";
    case BridgeErrc::MalformedJson: return "malformed-json";
    case BridgeErrc::UnknownOperation: return "unknown-operation";
    case BridgeErrc::SchemaViolation: return "schema-violation";
  }
  return "unknown";
}

bool integral_xsd_type(std::string_view t) {
  return t == "int" || t == "long" || t == "short" || t == "byte" || t == "unsignedInt" || t == "unsignedShort" ||
         t == "unsignedByte";
}

ServiceSchema::ServiceSchema(wsdl::WsdlDescription desc) : desc_(std::move(desc)) {}

const wsdl::SchemaField* ServiceSchema::body_element(std::string_view op, Direction dir) const {
  const auto* o = desc_.find_operation(op);
  if (!o) return nullptr;
  const std::string& msg = dir == Direction::Request ? o->input : o->output;
  if (msg.empty()) return nullptr;
  const auto* m = desc_.find_message(msg);
  if (!m || m->parts.empty()) return nullptr;
  return &m->parts.front().element;
}

const wsdl::PortOperation* ServiceSchema::operation_for(std::string_view ns, std::string_view local,
                                                        Direction dir) const {
  for (const auto& o : desc_.operations) {
    const auto* e = body_element(o.name, dir);
    if (e && e->ns == ns && e->name == local) return &o;
  }
  return nullptr;
}

SoapEnvelope parse_soap(std::string_view document) {
  xml::Element root;
  try {
    root = xml::parse(document);
  } catch (const xml::ParseError& e) {
    throw BridgeError(BridgeErrc::MalformedXml, "", e.what());
  }
  if (root.local != "Envelope" || root.ns != kSoap11Ns) {
    std::string why = root.ns == kSoap12Ns ? "SOAP 1.2 envelopes are not supported"
                                           : "root <" + root.name + "> is not a SOAP 1.1 Envelope";
    throw BridgeError(BridgeErrc::NotSoap11, "", why);
  }
  SoapEnvelope env;
  for (const auto& [name, value] : root.attributes) {
    if (name.rfind("xmlns:", 0) == 0) env.namespaces.emplace_back(name.substr(6), value);
  }
  const xml::Element* body = nullptr;
  for (const auto& c : root.children) {
    if (c.is(kSoap11Ns, "Header")) {
      for (const auto& h : c.children) env.headers.push_back(convert(h));
    } else if (c.is(kSoap11Ns, "Body")) {
      if (body) throw BridgeError(BridgeErrc::MissingBody, "", "envelope has more than one Body");
      body = &c;
    }
  }
  if (!body || body->children.empty()) throw BridgeError(BridgeErrc::MissingBody, "", "envelope has no body element");
  if (body->children.size() > 1) {
    throw BridgeError(BridgeErrc::MultipleBodyChildren, "",
                      "document/literal body must have exactly one child, found " + std::to_string(body->children.size()));
  }
  XmlNode wrapper = convert(*body);
  bool root_encoded = std::any_of(root.attributes.begin(), root.attributes.end(), [&](const auto& a) {
    return a.first == "encodingStyle" || root.resolve(a.first) == xml::QName{std::string(kSoap11Ns), "encodingStyle"};
  });
  if (root_encoded || encoded(wrapper)) {
    throw BridgeError(BridgeErrc::RpcEncoded, "", "SOAP encoding (rpc/encoded) is not supported");
  }
  env.body = std::move(wrapper.children.front());
  return env;
}

std::string serialize_soap(const SoapEnvelope& envelope) { return Writer(envelope).run(envelope); }

TaskEnvelope soap_to_canonical(const SoapEnvelope& envelope, const ServiceSchema* schema, Direction direction) {
  TaskEnvelope t;
  t.direction = direction;
  const wsdl::SchemaField* field = nullptr;
  if (schema) {
    const auto* op = schema->operation_for(envelope.body.ns, envelope.body.local, direction);
    if (!op) {
      throw BridgeError(BridgeErrc::UnknownOperation, "$",
                        "no operation has body element {" + envelope.body.ns + "}" + envelope.body.local);
    }
    t.operation = op->name;
    field = schema->body_element(op->name, direction);
  } else {
    t.operation = envelope.body.local;
    const std::string suffix = "Response";
    if (direction == Direction::Response && t.operation.size() > suffix.size() &&
        t.operation.compare(t.operation.size() - suffix.size(), suffix.size(), suffix) == 0) {
      t.operation.resize(t.operation.size() - suffix.size());
    }
  }
  for (const auto& h : envelope.headers) {
    if (h.local == "MessageID" || h.local == "RelatesTo" || h.local == "CorrelationId") {
      t.correlation_id = xml::trim(h.text);
    } else if (h.local == "ReplyTo") {
      for (const auto& c : h.children) {
        if (c.local == "Address") t.reply_to = xml::trim(c.text);
      }
    }
  }
  ToCanonical conv(schema);
  json payload = conv.value(envelope.body, field, "$.data");
  if (payload.is_string()) {
    payload = payload.get<std::string>().empty() ? json::object() : json{{"#text", payload}};
  } else if (payload.is_null()) {
    payload = json::object();
  } else if (!payload.is_object()) {
    payload = json{{"#text", payload}};
  }
  t.payload = std::move(payload);
  return t;
}

SoapEnvelope canonical_to_soap(const TaskEnvelope& env, const ServiceSchema* schema) {
  SoapEnvelope out;
  std::string ns;
  std::string local;
  const wsdl::SchemaField* field = nullptr;
  if (schema) {
    field = schema->body_element(env.operation, env.direction);
    if (!field) {
      throw BridgeError(BridgeErrc::UnknownOperation, "$.op",
                        "operation '" + env.operation + "' has no " +
                            (env.direction == Direction::Request ? "input" : "output") + " message");
    }
    ns = field->ns;
    local = field->name;
    out.namespaces.emplace_back("tns", schema->description().target_namespace);
  } else {
    local = env.operation + (env.direction == Direction::Response ? "Response" : "");
  }
  bool headers = !env.correlation_id.empty() || !env.reply_to.empty();
  if (headers) out.namespaces.emplace_back("wsa", std::string(kAddressingNs));
  out.namespaces.emplace_back("xsi", std::string(kXsiNs));
  if (!env.correlation_id.empty()) {
    XmlNode h;
    h.ns = kAddressingNs;
    h.local = env.direction == Direction::Request ? "MessageID" : "RelatesTo";
    h.text = env.correlation_id;
    out.headers.push_back(std::move(h));
  }
  if (!env.reply_to.empty()) {
    XmlNode h;
    h.ns = kAddressingNs;
    h.local = "ReplyTo";
    XmlNode a;
    a.ns = kAddressingNs;
    a.local = "Address";
    a.text = env.reply_to;
    h.children.push_back(std::move(a));
    out.headers.push_back(std::move(h));
  }
  ToSoap conv(schema);
  const json& payload = env.payload.is_null() ? json::object() : env.payload;
  if (field && field->simple()) {
    out.body = conv.node(ns, local, payload.contains("#text") ? payload : json::object(), field, "$.data");
  } else {
    out.body = conv.node(ns, local, payload, field, "$.data");
  }
  return out;
}

std::string canonical_to_json(const TaskEnvelope& env) {
  std::string out = "{\"op\":" + dump(env.operation) + ",\"cid\":" + dump(env.correlation_id) + ",\"data\":";
  out += env.payload.is_null() ? "{}" : dump(env.payload);
  out += "}";
  return out;
}

TaskEnvelope json_to_canonical(std::string_view bytes, Direction direction) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw BridgeError(BridgeErrc::MalformedJson, "$", e.what());
  }
  if (!doc.is_object()) throw BridgeError(BridgeErrc::MalformedJson, "$", "expected an object");
  for (const auto& [k, v] : doc.items()) {
    if (k != "op" && k != "cid" && k != "data") throw BridgeError(BridgeErrc::SchemaViolation, "$." + k, "unknown key");
  }
  auto op = doc.find("op");
  if (op == doc.end() || !op->is_string() || op->get_ref<const std::string&>().empty()) {
    throw BridgeError(BridgeErrc::SchemaViolation, "$.op", "expected a non-empty string");
  }
  TaskEnvelope t;
  t.direction = direction;
  t.operation = op->get<std::string>();
  if (auto cid = doc.find("cid"); cid != doc.end()) {
    if (!cid->is_string()) throw BridgeError(BridgeErrc::SchemaViolation, "$.cid", "expected a string");
    t.correlation_id = cid->get<std::string>();
  }
  if (direction == Direction::Request && t.correlation_id.empty()) {
    throw BridgeError(BridgeErrc::SchemaViolation, "$.cid", "requests need a correlation id");
  }
  if (auto data = doc.find("data"); data != doc.end()) {
    if (!data->is_object()) throw BridgeError(BridgeErrc::SchemaViolation, "$.data", "expected an object");
    t.payload = std::move(*data);
  }
  return t;
}

void validate(const json& payload, const ServiceSchema& schema, std::string_view op, Direction dir,
              Completeness completeness, std::string_view root) {
  const auto* field = schema.body_element(op, dir);
  if (!field) {
    throw BridgeError(BridgeErrc::UnknownOperation, "$.op", "operation '" + std::string(op) + "' has no such message");
  }
  std::string path(root);
  if (field->simple()) {
    if (!payload.is_object()) throw BridgeError(BridgeErrc::SchemaViolation, path, "expected an object");
    if (payload.contains("#text")) validate_value(payload.at("#text"), schema, *field, completeness, path + ".#text");
    return;
  }
  validate_fields(payload, schema, schema.children(*field), completeness, path);
}

std::string soap_fault(std::string_view code, std::string_view message, std::string_view relates_to) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<soapenv:Envelope xmlns:soapenv=\"" +
                    std::string(kSoap11Ns) + "\"";
  if (!relates_to.empty()) {
    out += " xmlns:wsa=\"" + std::string(kAddressingNs) + "\"><soapenv:Header><wsa:RelatesTo>" +
           xml::escape(relates_to) + "</wsa:RelatesTo></soapenv:Header>";
  } else {
    out += ">";
  }
  return out + "<soapenv:Body><soapenv:Fault><faultcode>soapenv:" + std::string(code) + "</faultcode><faultstring>" +
         xml::escape(message) + "</faultstring></soapenv:Fault></soapenv:Body></soapenv:Envelope>";
}

}  // namespace muit::bridge
