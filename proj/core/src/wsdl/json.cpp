#include "muit/wsdl/wsdl.hpp"

namespace muit::wsdl {

namespace {

nlohmann::json field_json(const SchemaField& f) {
  nlohmann::json j{{"name", f.name}, {"repeated", f.repeated}, {"optional", f.optional}};
  if (!f.ns.empty()) j["ns"] = f.ns;
  if (f.simple()) j["xsd_type"] = f.xsd_type;
  if (!f.type_name.empty()) j["type"] = f.type_name;
  if (!f.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : f.children) j["children"].push_back(field_json(c));
  }
  return j;
}

std::string type_text(const dsl::TypeRef& t) {
  std::string s = t.name;
  if (!t.args.empty()) {
    s += "<";
    for (std::size_t i = 0; i < t.args.size(); ++i) s += (i ? "," : "") + type_text(t.args[i]);
    s += ">";
  }
  return s;
}

nlohmann::json op_json(const dsl::OperationDecl& op) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : op.params) params.push_back({{"name", p.name}, {"type", type_text(p.type)}});
  return {{"name", op.name}, {"params", params}, {"async", op.async}};
}

}  // namespace

nlohmann::json to_json(const WsdlDescription& d) {
  nlohmann::json j;
  j["service"] = d.service_name;
  j["target_namespace"] = d.target_namespace;
  j["port_type"] = d.port_type;
  j["binding"] = d.binding;
  j["style"] = d.style;
  j["address"] = d.address;
  j["warnings"] = d.warnings;
  j["messages"] = nlohmann::json::array();
  for (const auto& m : d.messages) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : m.parts) parts.push_back({{"name", p.name}, {"element", field_json(p.element)}});
    j["messages"].push_back({{"name", m.name}, {"parts", parts}});
  }
  j["operations"] = nlohmann::json::array();
  for (const auto& o : d.operations) {
    j["operations"].push_back({{"name", o.name}, {"input", o.input}, {"output", o.output}, {"soap_action", o.soap_action}});
  }
  j["complex_types"] = nlohmann::json::object();
  for (const auto& [name, t] : d.complex_types) {
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : t.fields) fields.push_back(field_json(f));
    j["complex_types"][name] = fields;
  }
  return j;
}

nlohmann::json to_json(const IntermediateUiModel& m) {
  nlohmann::json j;
  j["service"] = m.service_name;
  j["service_url"] = m.service_url;
  j["entities"] = nlohmann::json::array();
  for (const auto& e : m.data_entities) {
    nlohmann::json props = nlohmann::json::array();
    for (const auto& p : e.properties) props.push_back({{"name", p.name}, {"type", type_text(p.type)}});
    j["entities"].push_back({{"name", e.name}, {"properties", props}});
  }
  j["operations"] = nlohmann::json::array();
  for (const auto& op : m.model_operations) j["operations"].push_back(op_json(op));
  j["controller_events"] = nlohmann::json::array();
  for (const auto& ev : m.controller_events) j["controller_events"].push_back({{"name", ev.name}, {"operation", ev.operation}});
  j["event_handlers"] = nlohmann::json::array();
  for (const auto& op : m.event_handlers) j["event_handlers"].push_back(op_json(op));
  j["views"] = nlohmann::json::array();
  for (const auto& s : m.default_views) j["views"].push_back(s.name);
  return j;
}

}  // namespace muit::wsdl
