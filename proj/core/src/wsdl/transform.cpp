#include <cctype>
#include <set>
#include <sstream>

#include "muit/dsl/parser.hpp"
#include "muit/dsl/token.hpp"
#include "muit/wsdl/wsdl.hpp"

namespace muit::wsdl {

namespace {

std::string type_text(const dsl::TypeRef& t) {
  std::string s = t.name;
  if (!t.args.empty()) {
    s += "<";
    for (std::size_t i = 0; i < t.args.size(); ++i) s += (i ? ", " : "") + type_text(t.args[i]);
    s += ">";
  }
  return s;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

dsl::DslModule parse_or_throw(const std::string& src) {
  auto r = dsl::parse_source(src);
  if (!r.diagnostics.empty()) {
    throw std::logic_error("generated source does not parse: " + r.diagnostics.front().message + "\n" + src);
  }
  return std::move(r.module);
}

class Builder {
 public:
  explicit Builder(const WsdlDescription& d) : d_(d) {
    for (const auto& [name, t] : d_.complex_types) type_entities_.insert(identifier(name));
  }

  // Entity declarations as source text, one per complex type and message.
  std::string entities() {
    std::ostringstream out;
    for (const auto& [name, t] : d_.complex_types) entity(out, identifier(name), t.fields);
    for (const auto& m : d_.messages) entity(out, message_entity(m.name), d_.message_fields(m));
    while (!pending_.empty()) {
      auto [name, fields] = std::move(pending_.back());
      pending_.pop_back();
      entity(out, name, fields);
    }
    return out.str();
  }

  std::string message_entity(const std::string& message) const {
    std::string n = identifier(message);
    return type_entities_.count(n) ? n + "Message" : n;
  }

  // Parameter list for an operation's input message.
  std::vector<std::pair<std::string, std::string>> params(const Message& input) {
    std::vector<std::pair<std::string, std::string>> out;
    if (input.parts.size() == 1 && !input.parts.front().element.type_name.empty()) {
      std::string t = identifier(input.parts.front().element.type_name);
      std::string p(1, static_cast<char>(std::tolower(static_cast<unsigned char>(t.front()))));
      if (p == "_") p = "value";
      out.emplace_back(t, identifier(p));
      return out;
    }
    std::string owner = message_entity(input.name);
    for (const auto& f : d_.message_fields(input)) out.emplace_back(field_type(owner, f), identifier(f.name));
    return out;
  }

  std::string field_type(const std::string& owner, const SchemaField& f) {
    std::string t;
    if (f.simple()) {
      t = dsl_type_for(f.xsd_type);
    } else if (!f.type_name.empty()) {
      t = identifier(f.type_name);
    } else {
      t = owner + "_" + identifier(f.name);
      if (anonymous_.insert(t).second) pending_.emplace_back(t, f.children);
    }
    return f.repeated ? "List<" + t + ">" : t;
  }

 private:
  void entity(std::ostringstream& out, const std::string& name, const std::vector<SchemaField>& fields) {
    out << "entity " << name << " {\n";
    for (const auto& f : fields) out << "  " << identifier(f.name) << ": " << field_type(name, f) << ";\n";
    out << "}\n";
  }

  const WsdlDescription& d_;
  std::set<std::string> type_entities_;
  std::set<std::string> anonymous_;
  std::vector<std::pair<std::string, std::vector<SchemaField>>> pending_;
};

bool is_void(const WsdlDescription& d, const PortOperation& op) {
  if (op.output.empty()) return true;
  const Message* m = d.find_message(op.output);
  return !m || d.message_fields(*m).empty();
}

}  // namespace

std::string dsl_type_for(std::string_view xsd_type) {
  if (xsd_type == "string") return "String";
  if (xsd_type == "int" || xsd_type == "long") return "int";
  if (xsd_type == "boolean") return "boolean";
  if (xsd_type == "dateTime" || xsd_type == "date") return "DateTime";
  throw WsdlError(WsdlErrc::UnmappableType, "XML Schema type 'xs:" + std::string(xsd_type) + "' has no DSL equivalent");
}

std::string identifier(std::string_view xml_name) {
  std::string out;
  for (char c : xml_name) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    out += ok ? c : '_';
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(out.begin(), '_');
  if (dsl::keyword_kind(out) != dsl::TokenKind::Identifier) out += '_';
  return out;
}

IntermediateUiModel transform(const WsdlDescription& desc) {
  IntermediateUiModel model;
  model.service_name = desc.service_name;
  model.service_url = desc.address;
  Builder b(desc);

  std::ostringstream src;
  src << b.entities();
  std::vector<bool> events;
  for (const auto& op : desc.operations) {
    const Message* in = desc.find_message(op.input);
    auto params = b.params(*in);
    bool event = is_void(desc, op);
    events.push_back(event);
    if (!event) model.output_entities[identifier(op.name)] = b.message_entity(op.output);
    src << "operation " << identifier(op.name) << "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
      src << (i ? ", " : "") << params[i].first << " " << params[i].second;
    }
    src << ") {\n  " << (event ? "" : "return ") << "invoke(" << quote(op.name);
    for (const auto& p : params) src << ", " << p.second;
    src << ");\n}\n";
  }

  dsl::DslModule m = parse_or_throw(src.str());
  model.data_entities = std::move(m.entities);
  for (std::size_t i = 0; i < m.operations.size(); ++i) {
    if (events[i]) {
      model.controller_events.push_back({desc.operations[i].name, m.operations[i].name});
      model.event_handlers.push_back(std::move(m.operations[i]));
    } else {
      model.model_operations.push_back(std::move(m.operations[i]));
    }
  }
  return model;
}

IntermediateUiModel generate_default_views(IntermediateUiModel model) {
  auto find_entity = [&](const std::string& n) -> const dsl::EntityDecl* {
    for (const auto& e : model.data_entities)
      if (e.name == n) return &e;
    return nullptr;
  };
  auto input_type = [](const std::string& t) -> std::string {
    if (t == "int") return "number";
    if (t == "DateTime") return "date";
    if (t == "boolean") return "checkbox";
    return "text";
  };
  auto is_simple = [](const std::string& t) { return t == "String" || t == "int" || t == "boolean" || t == "DateTime"; };

  std::ostringstream src;
  for (const auto& op : model.model_operations) {
    std::string result = op.name + "_result";
    std::vector<std::string> args;
    std::ostringstream form;
    for (const auto& p : op.params) {
      std::string t = type_text(p.type);
      std::string var = op.name + "_" + p.name;
      args.push_back(var);
      if (is_simple(t)) {
        src << "var " << var << " = "
            << (t == "int" ? "0" : t == "boolean" ? "false" : t == "DateTime" ? "DateTime.now()" : "\"\"") << ";\n";
        form << "    label { " << quote(p.name) << " }\n"
             << "    input { type = " << quote(input_type(t)) << ", name = " << quote(p.name) << ", value = " << var
             << " }\n";
      } else if (const auto* e = find_entity(t)) {
        src << "var " << var << " = " << t << ".create();\n";
        for (const auto& prop : e->properties) {
          std::string pt = type_text(prop.type);
          if (!is_simple(pt)) continue;
          form << "    label { " << quote(prop.name) << " }\n"
               << "    input { type = " << quote(input_type(pt)) << ", name = " << quote(p.name + "." + prop.name)
               << ", value = " << var << "." << prop.name << " }\n";
        }
      } else {
        src << "var " << var << ";\n";
      }
    }
    src << "var " << result << ";\n";

    std::string call = op.name + "(";
    for (std::size_t i = 0; i < args.size(); ++i) call += (i ? ", " : "") + args[i];
    call += ")";
    std::string button = "button { " + quote(op.name) + ", " + result + " = " + call + "; }";

    src << "screen " << op.name << " {\n  header(" << quote(op.name) << ");\n";
    if (op.params.empty()) {
      src << "  " << button << "\n";
    } else {
      src << "  form {\n" << form.str() << "    " << button << "\n  }\n";
    }
    // A list view for every repeated field of the output.
    auto out_name = model.output_entities.find(op.name);
    const dsl::EntityDecl* out = out_name == model.output_entities.end() ? nullptr : find_entity(out_name->second);
    if (out) {
      for (const auto& prop : out->properties) {
        if (prop.type.name != "List") continue;
        src << "  list {\n    foreach (r in " << result << "." << prop.name << ") {\n      item { r }\n    }\n  }\n";
      }
    }
    src << "}\n";
  }

  dsl::DslModule m = parse_or_throw(src.str());
  model.view_variables = std::move(m.variables);
  model.default_views = std::move(m.screens);
  return model;
}

std::string emit_intermediate_dsl(const IntermediateUiModel& model) {
  dsl::DslModule m;
  m.name = model.service_name;
  m.entities = model.data_entities;
  m.variables = model.view_variables;
  m.variables.insert(m.variables.begin(), parse_or_throw("var serviceDescription;").variables.front());
  m.operations.push_back(parse_or_throw(
                             "operation import(String WSDLUrl, String user, String pwd) {\n"
                             "  serviceDescription = httpRequest(WSDLUrl + \"?user=\" + user + \"&pwd=\" + pwd);\n"
                             "}\n")
                             .operations.front());
  m.operations.insert(m.operations.end(), model.model_operations.begin(), model.model_operations.end());
  m.operations.insert(m.operations.end(), model.event_handlers.begin(), model.event_handlers.end());
  m.screens = model.default_views;
  std::string header = "// Intermediate UI for " + model.service_name + ", served from " + model.service_url;
  for (char& c : header)
    if (c == '\n' || c == '\r') c = ' ';
  header += '\n';
  return header + dsl::print(m);
}

}  // namespace muit::wsdl
