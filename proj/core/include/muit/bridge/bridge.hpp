#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/wsdl/wsdl.hpp"

namespace muit::bridge {

inline constexpr std::string_view kSoap11Ns = "http://schemas.xmlsoap.org/soap/envelope/";
inline constexpr std::string_view kSoap12Ns = "http://www.w3.org/2003/05/soap-envelope";
inline constexpr std::string_view kAddressingNs = "http://www.w3.org/2005/08/addressing";
inline constexpr std::string_view kXsiNs = "http://www.w3.org/2001/XMLSchema-instance";

enum class BridgeErrc {
  MalformedXml,
  NotSoap11,
  MissingBody,
  MultipleBodyChildren,
  RpcEncoded,
  MixedContent,
  MalformedJson,
  UnknownOperation,
  SchemaViolation,
};

std::string_view to_string(BridgeErrc code);

class BridgeError : public std::runtime_error {
 public:
  BridgeError(BridgeErrc code, std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), code_(code), path_(std::move(path)) {}
  BridgeErrc code() const { return code_; }
  // JSON-path style location of the offending value, e.g. "$.data.days".
  const std::string& path() const { return path_; }

 private:
  BridgeErrc code_;
  std::string path_;
};

struct XmlAttribute {
  std::string ns;
  std::string local;
  std::string value;
  friend bool operator==(const XmlAttribute&, const XmlAttribute&) = default;
};

// Element tree compared by qualified name; prefixes are not part of equality.
struct XmlNode {
  std::string ns;
  std::string local;
  std::vector<XmlAttribute> attributes;
  std::string text;
  std::vector<XmlNode> children;
  friend bool operator==(const XmlNode&, const XmlNode&) = default;
};

struct SoapEnvelope {
  std::vector<XmlNode> headers;
  XmlNode body;  // the single body child
  // Prefix -> namespace declarations seen on the envelope; used as a hint
  // when serializing, ignored by equality.
  std::vector<std::pair<std::string, std::string>> namespaces;

  friend bool operator==(const SoapEnvelope& a, const SoapEnvelope& b) {
    return a.headers == b.headers && a.body == b.body;
  }
};

enum class Direction { Request, Response };

struct TaskEnvelope {
  std::string operation;
  std::string correlation_id;
  nlohmann::json payload = nlohmann::json::object();
  Direction direction = Direction::Request;
  // WS-Addressing ReplyTo of an asynchronous request; not part of the JSON form.
  std::string reply_to;
  friend bool operator==(const TaskEnvelope&, const TaskEnvelope&) = default;
};

// Operation and message layouts of one service, derived from its WSDL.
class ServiceSchema {
 public:
  explicit ServiceSchema(wsdl::WsdlDescription desc);

  const wsdl::WsdlDescription& description() const { return desc_; }
  const wsdl::PortOperation* operation(std::string_view name) const { return desc_.find_operation(name); }
  // The body element of an operation's message, or null for the missing
  // output of a one-way operation.
  const wsdl::SchemaField* body_element(std::string_view op, Direction dir) const;
  // Operation whose message body element has this qualified name.
  const wsdl::PortOperation* operation_for(std::string_view ns, std::string_view local, Direction dir) const;
  const std::vector<wsdl::SchemaField>& children(const wsdl::SchemaField& f) const { return desc_.fields_of(f); }
  bool complex(const wsdl::SchemaField& f) const { return !f.simple(); }

 private:
  wsdl::WsdlDescription desc_;
};

SoapEnvelope parse_soap(std::string_view document);
std::string serialize_soap(const SoapEnvelope& envelope);

// Body child becomes the operation; header MessageID/RelatesTo the
// correlation id; ReplyTo/Address the reply_to. With a schema, xs:int and
// xs:long leaves become numbers, repeated fields are always arrays and
// elements outside the schema are rejected.
TaskEnvelope soap_to_canonical(const SoapEnvelope& envelope, const ServiceSchema* schema = nullptr,
                               Direction direction = Direction::Request);
SoapEnvelope canonical_to_soap(const TaskEnvelope& env, const ServiceSchema* schema = nullptr);

// `{"op":...,"cid":...,"data":{...}}`, compact, payload keys sorted.
std::string canonical_to_json(const TaskEnvelope& env);
TaskEnvelope json_to_canonical(std::string_view bytes, Direction direction = Direction::Request);

enum class Completeness { Full, Partial };

// Checks a payload against an operation's message. Partial accepts missing
// required fields, as in a result that only carries what the user changed.
void validate(const nlohmann::json& payload, const ServiceSchema& schema, std::string_view op, Direction dir,
              Completeness completeness = Completeness::Full, std::string_view root = "$.data");

// True for the XML Schema builtins mapped to JSON numbers.
bool integral_xsd_type(std::string_view xsd_type);

// SOAP 1.1 fault envelope; `code` is Client or Server. A non-empty
// `relates_to` adds a WS-Addressing RelatesTo header.
std::string soap_fault(std::string_view code, std::string_view message, std::string_view relates_to = {});

}  // namespace muit::bridge
