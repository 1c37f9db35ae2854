#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/dsl/ast.hpp"

namespace muit::wsdl {

inline constexpr std::string_view kWsdlNs = "http://schemas.xmlsoap.org/wsdl/";
inline constexpr std::string_view kSoapBindingNs = "http://schemas.xmlsoap.org/wsdl/soap/";
inline constexpr std::string_view kXsdNs = "http://www.w3.org/2001/XMLSchema";

enum class WsdlErrc {
  MalformedXml,
  NotWsdl,
  MissingPortType,
  MissingAddress,
  InvalidAddress,
  UndefinedMessage,
  UndefinedSchemaComponent,
  UnsupportedStyle,
  UnmappableType,
};

std::string_view to_string(WsdlErrc code);

class WsdlError : public std::runtime_error {
 public:
  WsdlError(WsdlErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  WsdlErrc code() const { return code_; }

 private:
  WsdlErrc code_;
};

// An element in a message's schema. Exactly one of `xsd_type` (builtin simple
// type, e.g. "string") or `type_name` (named complexType) or `children`
// (anonymous complex content) describes the content.
struct SchemaField {
  std::string name;
  std::string ns;  // element namespace; empty when unqualified
  std::string xsd_type;
  std::string type_name;
  std::vector<SchemaField> children;
  bool repeated = false;
  bool optional = false;

  bool simple() const { return !xsd_type.empty(); }
};

struct ComplexType {
  std::string name;
  std::vector<SchemaField> fields;
};

struct MessagePart {
  std::string name;
  SchemaField element;  // the part's element, or a synthetic one for type= parts
};

struct Message {
  std::string name;
  std::vector<MessagePart> parts;
};

struct PortOperation {
  std::string name;
  std::string input;   // message name
  std::string output;  // empty for one-way operations
  std::string soap_action;
};

struct WsdlDescription {
  std::string service_name;
  std::string target_namespace;
  std::string port_type;
  std::string binding;
  std::string style = "document";
  std::string address;
  std::vector<Message> messages;
  std::vector<PortOperation> operations;
  std::map<std::string, ComplexType> complex_types;
  std::vector<std::string> warnings;

  const Message* find_message(std::string_view name) const;
  const PortOperation* find_operation(std::string_view name) const;
  // Child elements of a complex field, following named types.
  const std::vector<SchemaField>& fields_of(const SchemaField& field) const;
  // Fields that make up a message's content: the children of a single part
  // element, or one field per part otherwise.
  std::vector<SchemaField> message_fields(const Message& message) const;
};

WsdlDescription parse_wsdl(std::string_view document);

struct ControllerEvent {
  std::string name;
  std::string operation;
};

struct IntermediateUiModel {
  std::string service_name;
  std::string service_url;
  std::vector<dsl::EntityDecl> data_entities;
  std::vector<dsl::OperationDecl> model_operations;
  // Operation name -> entity mirroring its output message.
  std::map<std::string, std::string> output_entities;
  // One-way operations. Each also gets a handler operation with no result
  // so the event has something to bind to.
  std::vector<ControllerEvent> controller_events;
  std::vector<dsl::OperationDecl> event_handlers;
  std::vector<dsl::GlobalVar> view_variables;
  std::vector<dsl::ScreenDecl> default_views;
};

IntermediateUiModel transform(const WsdlDescription& desc);
IntermediateUiModel generate_default_views(IntermediateUiModel model);

// `.muit` source: the import stub, entities, operations and default views.
std::string emit_intermediate_dsl(const IntermediateUiModel& model);

nlohmann::json to_json(const WsdlDescription& desc);
nlohmann::json to_json(const IntermediateUiModel& model);

// DSL type for an XML Schema builtin, e.g. "int" for xs:long. Throws
// UnmappableType for anything outside the supported set.
std::string dsl_type_for(std::string_view xsd_type);

// A valid DSL identifier derived from an XML name.
std::string identifier(std::string_view xml_name);

}  // namespace muit::wsdl
