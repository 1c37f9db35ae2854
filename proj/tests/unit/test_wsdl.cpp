#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "muit/dsl/checker.hpp"
#include "muit/dsl/parser.hpp"
#include "muit/wsdl/wsdl.hpp"
#include "support.hpp"

using namespace muit;
using namespace muit::wsdl;

namespace {

std::string fixture(const std::string& name) { return test::read_file(test::data_dir() / "wsdl" / name); }

const std::vector<std::string> kFixtures = {"task_approval.wsdl", "reimbursement_task.wsdl", "void_output.wsdl",
                                            "no_operations.wsdl"};

WsdlErrc error_of(const std::string& doc) {
  try {
    parse_wsdl(doc);
  } catch (const WsdlError& e) {
    return e.code();
  }
  FAIL("expected a WsdlError");
  return WsdlErrc::MalformedXml;
}

std::string wrap(const std::string& body) {
  return R"(<wsdl:definitions name="t" targetNamespace="urn:t" xmlns:wsdl="http://schemas.xmlsoap.org/wsdl/"
    xmlns:soap="http://schemas.xmlsoap.org/wsdl/soap/" xmlns:xs="http://www.w3.org/2001/XMLSchema"
    xmlns:tns="urn:t">)" +
         body + "</wsdl:definitions>";
}

const char* kAddress = R"(<wsdl:service name="s"><wsdl:port name="p" binding="tns:b">
  <soap:address location="http://h/x"/></wsdl:port></wsdl:service>)";

dsl::Diagnostics errors_in(const std::string& src) {
  auto r = dsl::parse_source(src);
  dsl::Diagnostics out = r.diagnostics;
  for (auto& d : dsl::check(r.module))
    if (d.severity == dsl::Severity::Error) out.push_back(d);
  return out;
}

}  // namespace

TEST_CASE("sample reimbursement WSDL") {
  auto d = parse_wsdl(fixture("reimbursement_task.wsdl"));
  CHECK(d.service_name == "reimbursementTask");
  CHECK(d.port_type == "reimbursementTaskPortType");
  REQUIRE(d.operations.size() == 1);
  CHECK(d.operations[0].name == "getTaskInfo");
  CHECK(d.address == "http://www.pku.edu.cn/MUIT/reimbursementTask.js");
  CHECK(d.warnings.empty());

  auto m = transform(d);
  REQUIRE(m.model_operations.size() == 1);
  CHECK(m.model_operations[0].name == "getTaskInfo");
  std::set<std::string> entities;
  for (const auto& e : m.data_entities) entities.insert(e.name);
  CHECK(entities == std::set<std::string>{"getTaskInfoRequest", "getTaskInfoResponse"});
  CHECK(m.service_url == d.address);

  std::string src = emit_intermediate_dsl(generate_default_views(m));
  auto r = dsl::parse_source(src);
  CHECK(r.module.find_operation("import"));
  CHECK(r.module.find_screen("getTaskInfo"));
}

TEST_CASE("counts agree with an ElementTree walk") {
  if (!test::have_python()) return;
  for (const auto& name : kFixtures) {
    CAPTURE(name);
    auto path = (test::data_dir() / "wsdl" / name).string();
    auto out = test::run_command(std::string(MUIT_PYTHON) + " " + MUIT_ORACLES + "/wsdl_counts.py " + path);
    REQUIRE(!out.empty());
    auto oracle = nlohmann::json::parse(out);
    auto d = parse_wsdl(fixture(name));
    CHECK(d.messages.size() == oracle["messages"].get<std::size_t>());
    CHECK(d.operations.size() == oracle["operations"].get<std::size_t>());
    // Conservation: one entity property per message field, nothing dropped.
    auto m = transform(d);
    for (const auto& msg : d.messages) {
      CAPTURE(msg.name);
      const dsl::EntityDecl* e = nullptr;
      for (const auto& x : m.data_entities)
        if (x.name == msg.name || x.name == msg.name + "Message") e = &x;
      REQUIRE(e);
      CHECK(e->properties.size() == oracle["fields"][msg.name].get<std::size_t>());
    }
  }
}

TEST_CASE("four-operation WSDL") {
  auto d = parse_wsdl(fixture("task_approval.wsdl"));
  CHECK(d.operations.size() == 4);
  CHECK(d.messages.size() == 8);
  CHECK(d.find_operation("delayTask")->soap_action == "urn:delayTask");
  auto m = transform(d);
  CHECK(m.model_operations.size() + m.controller_events.size() == 4);

  // Each operation lands in exactly one of the two lists.
  for (const auto& op : d.operations) {
    int hits = 0;
    for (const auto& o : m.model_operations) hits += o.name == op.name;
    for (const auto& ev : m.controller_events) hits += ev.name == op.name;
    CHECK(hits == 1);
  }

  const auto& approve = m.model_operations[1];
  CHECK(approve.name == "approveTask");
  REQUIRE(approve.params.size() == 1);
  CHECK(approve.params[0].type.name == "Task");
  CHECK(approve.params[0].name == "t");

  std::string src = emit_intermediate_dsl(generate_default_views(m));
  auto r = dsl::parse_source(src);
  REQUIRE(r.diagnostics.empty());
  CHECK(r.module.operations.size() == 5);
  CHECK(r.module.find_operation("import"));
}

TEST_CASE("default views") {
  auto m = generate_default_views(transform(parse_wsdl(fixture("task_approval.wsdl"))));
  auto screen = [&](const std::string& n) -> const dsl::ScreenDecl& {
    for (const auto& s : m.default_views)
      if (s.name == n) return s;
    FAIL("no screen " << n);
    return m.default_views.front();
  };
  auto count_tag = [](const std::vector<dsl::ScreenItem>& items, const std::string& tag) {
    std::function<int(const std::vector<dsl::ScreenItem>&)> walk = [&](const auto& xs) {
      int n = 0;
      for (const auto& it : xs) {
        if (const auto* el = std::get_if<dsl::Element>(&it.node)) {
          n += el->tag == tag;
          n += walk(el->children);
        } else if (const auto* fe = std::get_if<dsl::ForeachItem>(&it.node)) {
          n += walk(fe->body);
        }
      }
      return n;
    };
    return walk(items);
  };

  // approveTask(Task t): a form over Task's simple properties and one submit.
  const auto& approve = screen("approveTask");
  CHECK(count_tag(approve.items, "form") == 1);
  CHECK(count_tag(approve.items, "input") == 6);
  CHECK(count_tag(approve.items, "button") == 1);
  std::string printed = dsl::print(dsl::DslModule{.screens = {approve}});
  CHECK(printed.find("approveTask(approveTask_t)") != std::string::npos);

  // searchTask(taskList, String s): one text input and a result list.
  const auto& search = screen("searchTask");
  CHECK(count_tag(search.items, "input") == 1);
  CHECK(count_tag(search.items, "list") == 1);
}

TEST_CASE("zero-parameter operation gets a single button") {
  auto doc = wrap(R"(<wsdl:types><xs:schema targetNamespace="urn:t">
      <xs:element name="refresh"><xs:complexType><xs:sequence/></xs:complexType></xs:element>
      <xs:element name="refreshResponse"><xs:complexType><xs:sequence>
        <xs:element name="count" type="xs:int"/></xs:sequence></xs:complexType></xs:element>
    </xs:schema></wsdl:types>
    <wsdl:message name="in"><wsdl:part name="p" element="tns:refresh"/></wsdl:message>
    <wsdl:message name="out"><wsdl:part name="p" element="tns:refreshResponse"/></wsdl:message>
    <wsdl:portType name="pt"><wsdl:operation name="refresh">
      <wsdl:input message="tns:in"/><wsdl:output message="tns:out"/></wsdl:operation></wsdl:portType>)" +
                  std::string(kAddress));
  auto m = generate_default_views(transform(parse_wsdl(doc)));
  REQUIRE(m.default_views.size() == 1);
  const auto& items = m.default_views[0].items;
  REQUIRE(items.size() == 2);
  const auto* button = std::get_if<dsl::Element>(&items[1].node);
  REQUIRE(button);
  CHECK(button->tag == "button");
}

TEST_CASE("void output becomes a controller event") {
  auto d = parse_wsdl(fixture("void_output.wsdl"));
  auto m = transform(d);
  CHECK(m.model_operations.size() == 1);
  REQUIRE(m.controller_events.size() == 1);
  CHECK(m.controller_events[0].name == "notifyTask");
  CHECK(m.controller_events[0].operation == "notifyTask");
}

TEST_CASE("empty portType yields entities only") {
  auto d = parse_wsdl(fixture("no_operations.wsdl"));
  CHECK(d.operations.empty());
  CHECK(!d.warnings.empty());
  auto m = generate_default_views(transform(d));
  CHECK(m.model_operations.empty());
  CHECK(m.default_views.empty());
  CHECK(m.data_entities.size() == 1);
  auto r = dsl::parse_source(emit_intermediate_dsl(m));
  CHECK(r.module.operations.size() == 1);  // the import stub
  CHECK(r.module.screens.empty());
}

TEST_CASE("emitted source compiles for every fixture") {
  for (const auto& name : kFixtures) {
    CAPTURE(name);
    auto src = emit_intermediate_dsl(generate_default_views(transform(parse_wsdl(fixture(name)))));
    auto errs = errors_in(src);
    CHECK(errs.empty());
    for (const auto& e : errs) MESSAGE(e.message);
  }
}

TEST_CASE("transform is deterministic") {
  for (const auto& name : kFixtures) {
    auto a = to_json(generate_default_views(transform(parse_wsdl(fixture(name)))));
    auto b = to_json(generate_default_views(transform(parse_wsdl(fixture(name)))));
    CHECK(a.dump() == b.dump());
    CHECK(to_json(parse_wsdl(fixture(name))).dump() == to_json(parse_wsdl(fixture(name))).dump());
  }
}

TEST_CASE("distinct errors") {
  CHECK(error_of("<wsdl:definitions") == WsdlErrc::MalformedXml);
  CHECK(error_of("<definitions xmlns='urn:other'/>") == WsdlErrc::NotWsdl);
  CHECK(error_of(wrap(kAddress)) == WsdlErrc::MissingPortType);
  CHECK(error_of(wrap(R"(<wsdl:portType name="pt"/>)")) == WsdlErrc::MissingAddress);
  CHECK(error_of(wrap(R"(<wsdl:portType name="pt"/><wsdl:service name="s"><wsdl:port name="p">
      <soap:address location="not a url"/></wsdl:port></wsdl:service>)")) == WsdlErrc::InvalidAddress);
  CHECK(error_of(wrap(R"(<wsdl:portType name="pt"><wsdl:operation name="x">
      <wsdl:input message="tns:nope"/></wsdl:operation></wsdl:portType>)" + std::string(kAddress))) ==
        WsdlErrc::UndefinedMessage);
  CHECK(error_of(wrap(R"(<wsdl:message name="m"><wsdl:part name="p" element="tns:missing"/></wsdl:message>
      <wsdl:portType name="pt"/>)" + std::string(kAddress))) == WsdlErrc::UndefinedSchemaComponent);
  CHECK(error_of(fixture("rpc_encoded.wsdl")) == WsdlErrc::UnsupportedStyle);

  std::set<std::string> names;
  for (int c = 0; c <= static_cast<int>(WsdlErrc::UnmappableType); ++c) {
    names.insert(std::string(to_string(static_cast<WsdlErrc>(c))));
  }
  CHECK(names.size() == static_cast<std::size_t>(WsdlErrc::UnmappableType) + 1);
}

TEST_CASE("unmappable schema type names the type") {
  auto doc = wrap(R"(<wsdl:message name="m"><wsdl:part name="amount" type="xs:decimal"/></wsdl:message>
    <wsdl:portType name="pt"/>)" + std::string(kAddress));
  auto d = parse_wsdl(doc);
  try {
    transform(d);
    FAIL("expected UnmappableType");
  } catch (const WsdlError& e) {
    CHECK(e.code() == WsdlErrc::UnmappableType);
    CHECK(std::string(e.what()).find("decimal") != std::string::npos);
  }
}

TEST_CASE("type mapping") {
  CHECK(dsl_type_for("string") == "String");
  CHECK(dsl_type_for("int") == "int");
  CHECK(dsl_type_for("long") == "int");
  CHECK(dsl_type_for("boolean") == "boolean");
  CHECK(dsl_type_for("dateTime") == "DateTime");
  CHECK(dsl_type_for("date") == "DateTime");
  CHECK_THROWS_AS(dsl_type_for("float"), WsdlError);
}

TEST_CASE("identifiers") {
  CHECK(identifier("task-name") == "task_name");
  CHECK(identifier("2fa") == "_2fa");
  CHECK(identifier("import") == "import_");
  CHECK(identifier("") == "_");
}

TEST_CASE("binding naming a different portType is a warning") {
  std::string doc = fixture("reimbursement_task.wsdl");
  auto at = doc.find("type=\"tns:reimbursementTaskPortType\"");
  REQUIRE(at != std::string::npos);
  doc.replace(at, 36, "type=\"tns:reimburementTaskPortType\"");
  auto d = parse_wsdl(doc);
  CHECK(d.port_type == "reimbursementTaskPortType");
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0].find("reimburementTaskPortType") != std::string::npos);
}

TEST_CASE("policies and imports are recorded as warnings") {
  auto doc = wrap(R"(<wsdl:import namespace="urn:x" location="other.wsdl"/>
    <wsp:Policy xmlns:wsp="http://www.w3.org/ns/ws-policy"/>
    <wsdl:portType name="pt"/>)" + std::string(kAddress));
  auto d = parse_wsdl(doc);
  CHECK(d.warnings.size() == 4);  // import, policy, no operations, no binding
}

TEST_CASE("model dump") {
  auto j = to_json(generate_default_views(transform(parse_wsdl(fixture("task_approval.wsdl")))));
  CHECK(j["service"] == "taskApproval");
  CHECK(j["operations"].size() == 4);
  CHECK(j["views"].size() == 4);
  CHECK(j["operations"][2]["params"][1] == nlohmann::json{{"name", "days"}, {"type", "int"}});
}
