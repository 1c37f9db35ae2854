#include <doctest.h>

#include <functional>
#include <limits>
#include <random>
#include <set>

#include "muit/bridge/bridge.hpp"
#include "random_service.hpp"
#include "support.hpp"

using namespace muit;
using namespace muit::bridge;
using nlohmann::json;

namespace {

std::string soap_fixture(const std::string& name) { return test::read_file(test::data_dir() / "soap" / name); }

const ServiceSchema& task_schema() {
  static const ServiceSchema s(wsdl::parse_wsdl(test::read_file(test::data_dir() / "wsdl" / "task_approval.wsdl")));
  return s;
}

BridgeErrc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BridgeError& e) {
    return e.code();
  }
  FAIL("expected a BridgeError");
  return BridgeErrc::MalformedXml;
}

std::string error_path(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BridgeError& e) {
    return e.path();
  }
  FAIL("expected a BridgeError");
  return {};
}

// Ratio of compact JSON to source SOAP bytes for the approveTask request,
// pinned so accidental format changes show up.
constexpr double kApproveTaskRatio = 256.0 / 947.0;

}  // namespace

TEST_CASE("approveTask request carries the task record") {
  auto env = parse_soap(soap_fixture("approve_task_request.xml"));
  auto t = soap_to_canonical(env, &task_schema());
  CHECK(t.operation == "approveTask");
  CHECK(t.correlation_id == "urn:uuid:6b29fc40-ca47-1067-b31d-00dd010662da");
  CHECK(t.reply_to == "http://bpel.example.org/process/reimbursement/callback");
  CHECK(t.payload["task_name"] == "Employee Travel Fee Approval");
  CHECK(t.payload["status"] == "waiting for approval");
  CHECK(t.payload["createDate"] == "2014-07-21");
  CHECK(t.payload["dueDate"] == "2014-07-22");
  CHECK(t.payload["tags"] == json::array({"reimbursement", "travel", "hotel", "taxi"}));
}

TEST_CASE("int fields become numbers, nested records objects") {
  auto t = soap_to_canonical(parse_soap(soap_fixture("delay_task_request.xml")), &task_schema());
  CHECK(t.operation == "delayTask");
  CHECK(t.payload["days"] == 3);
  CHECK(t.payload["reason"] == "We delay... ");
  CHECK(t.payload["task"]["status"] == "waiting for approval");
  // Without a schema every leaf stays a string.
  CHECK(soap_to_canonical(parse_soap(soap_fixture("delay_task_request.xml"))).payload["days"] == "3");
}

TEST_CASE("empty body child maps to an empty payload") {
  auto env = parse_soap(soap_fixture("empty_body_child.xml"));
  CHECK(soap_to_canonical(env).payload == json::object());
  CHECK(soap_to_canonical(env, &task_schema()).payload == json::object());
  TaskEnvelope t{"getTaskInfo", "c1", json::object(), Direction::Request, ""};
  CHECK(canonical_to_json(t) == R"({"op":"getTaskInfo","cid":"c1","data":{}})");
}

TEST_CASE("repeated elements become arrays") {
  auto t = soap_to_canonical(parse_soap(soap_fixture("search_task_request.xml")), &task_schema());
  REQUIRE(t.payload["taskList"].is_array());
  CHECK(t.payload["taskList"].size() == 3);
  CHECK(t.payload["taskList"][2]["task_name"] == "Conference Registration & Hotel");
  // A repeated schema field stays an array with a single occurrence.
  CHECK(t.payload["taskList"][1]["tags"] == json::array({"hotel"}));
}

TEST_CASE("schemaless transcoding agrees with an ElementTree dump") {
  if (!test::have_python()) return;
  for (const char* name : {"approve_task_request.xml", "approve_task_response.xml", "delay_task_request.xml",
                           "search_task_request.xml", "empty_body_child.xml", "attributes.xml"}) {
    auto path = (test::data_dir() / "soap" / name).string();
    auto out = test::run_command(std::string(MUIT_PYTHON) + " " + MUIT_ORACLES + "/soap_tree.py '" + path + "'");
    REQUIRE_MESSAGE(!out.empty(), name);
    auto oracle = json::parse(out);
    auto t = soap_to_canonical(parse_soap(soap_fixture(name)));
    CHECK_MESSAGE(t.payload == oracle["data"], name);
    CHECK(t.operation == oracle["op"]);
  }
}

TEST_CASE("compact JSON is at most 80% of the SOAP bytes") {
  std::string soap = soap_fixture("approve_task_request.xml");
  auto t = soap_to_canonical(parse_soap(soap), &task_schema());
  std::string js = canonical_to_json(t);
  double ratio = static_cast<double>(js.size()) / static_cast<double>(soap.size());
  MESSAGE("SOAP " << soap.size() << " bytes, JSON " << js.size() << " bytes, ratio " << ratio);
  CHECK(ratio <= 0.80);
  CHECK(ratio == doctest::Approx(kApproveTaskRatio).epsilon(0.001));
  CHECK(js.find('\n') == std::string::npos);
  CHECK(js.find("\": ") == std::string::npos);
}

TEST_CASE("JSON encoding is UTF-8 with minimal escapes") {
  TaskEnvelope t{"approveTask", "c", {{"reason", "审批 \"quoted\"\n/"}}, Direction::Request, ""};
  auto js = canonical_to_json(t);
  CHECK(js == "{\"op\":\"approveTask\",\"cid\":\"c\",\"data\":{\"reason\":\"审批 \\\"quoted\\\"\\n/\"}}");
}

TEST_CASE("payload keys are sorted and envelope keys fixed") {
  TaskEnvelope t{"x", "c", {{"b", 1}, {"a", {{"d", true}, {"c", nullptr}}}}, Direction::Request, ""};
  CHECK(canonical_to_json(t) == R"({"op":"x","cid":"c","data":{"a":{"c":null,"d":true},"b":1}})");
}

TEST_CASE("SOAP round trip on the fixtures") {
  for (const char* name : {"approve_task_request.xml", "delay_task_request.xml", "search_task_request.xml",
                           "empty_body_child.xml"}) {
    auto env = parse_soap(soap_fixture(name));
    auto t = soap_to_canonical(env, &task_schema());
    auto back = parse_soap(serialize_soap(canonical_to_soap(t, &task_schema())));
    CHECK_MESSAGE(back == env, name);
  }
  auto env = parse_soap(soap_fixture("approve_task_response.xml"));
  auto t = soap_to_canonical(env, &task_schema(), Direction::Response);
  CHECK(t.operation == "approveTask");
  CHECK(parse_soap(serialize_soap(canonical_to_soap(t, &task_schema()))) == env);

  // Without a schema sibling order follows the sorted JSON keys, so only the
  // canonical form is stable.
  auto attrs = soap_to_canonical(parse_soap(soap_fixture("attributes.xml")));
  CHECK(soap_to_canonical(parse_soap(serialize_soap(canonical_to_soap(attrs)))) == attrs);
}

TEST_CASE("approved result becomes the approveTask response envelope") {
  TaskEnvelope r{"approveTask", "urn:uuid:6b29fc40-ca47-1067-b31d-00dd010662da", {{"status", "approved"}},
                 Direction::Response, ""};
  auto env = canonical_to_soap(r, &task_schema());
  CHECK(env.body.local == "approveTaskResponse");
  CHECK(env.body.ns == "http://example.org/muit/taskApproval");
  CHECK(env == parse_soap(soap_fixture("approve_task_response.xml")));
}

TEST_CASE("malformed and unsupported envelopes are typed errors") {
  CHECK(error_of([] { parse_soap(soap_fixture("rpc_encoded.xml")); }) == BridgeErrc::RpcEncoded);
  CHECK(error_of([] { parse_soap(soap_fixture("two_body_children.xml")); }) == BridgeErrc::MultipleBodyChildren);
  CHECK(error_of([] { parse_soap(soap_fixture("soap12.xml")); }) == BridgeErrc::NotSoap11);
  CHECK(error_of([] { parse_soap("<soapenv:Envelope xmlns:soapenv=\"x\">"); }) == BridgeErrc::MalformedXml);
  CHECK(error_of([] { parse_soap("<a><b></a></b>"); }) == BridgeErrc::MalformedXml);
  CHECK(error_of([] {
          parse_soap("<e:Envelope xmlns:e=\"http://schemas.xmlsoap.org/soap/envelope/\"><e:Body/></e:Envelope>");
        }) == BridgeErrc::MissingBody);
  auto mixed = parse_soap(soap_fixture("mixed_content.xml"));
  CHECK(error_of([&] { soap_to_canonical(mixed); }) == BridgeErrc::MixedContent);

  auto unknown = parse_soap(soap_fixture("attributes.xml"));
  CHECK(error_of([&] { soap_to_canonical(unknown, &task_schema()); }) == BridgeErrc::UnknownOperation);

  std::string bad_days = soap_fixture("delay_task_request.xml");
  bad_days.replace(bad_days.find(">3<"), 3, ">three<");
  auto env = parse_soap(bad_days);
  CHECK(error_path([&] { soap_to_canonical(env, &task_schema()); }) == "$.data.days");
}

TEST_CASE("JSON input errors name the offending path") {
  CHECK(error_of([] { json_to_canonical("{\"op\":"); }) == BridgeErrc::MalformedJson);
  CHECK(error_of([] { json_to_canonical("[]"); }) == BridgeErrc::MalformedJson);
  CHECK(error_path([] { json_to_canonical(R"({"cid":"c","data":{}})"); }) == "$.op");
  CHECK(error_path([] { json_to_canonical(R"({"op":"x","cid":"c","data":[]})"); }) == "$.data");
  CHECK(error_path([] { json_to_canonical(R"({"op":"x","data":{}})"); }) == "$.cid");
  CHECK(error_path([] { json_to_canonical(R"({"op":"x","cid":"c","data":{},"extra":1})"); }) == "$.extra");
  CHECK_NOTHROW(json_to_canonical(R"({"op":"x","data":{}})", Direction::Response));

  const auto& s = task_schema();
  CHECK_NOTHROW(validate({{"status", "approved"}}, s, "approveTask", Direction::Request, Completeness::Partial));
  CHECK_NOTHROW(validate({{"days", 3}, {"reason", "We delay... "}}, s, "delayTask", Direction::Request,
                         Completeness::Partial));
  CHECK(error_path([&] { validate({{"days", "3"}}, s, "delayTask", Direction::Request, Completeness::Partial); }) ==
        "$.data.days");
  CHECK(error_path([&] { validate({{"bogus", 1}}, s, "delayTask", Direction::Request, Completeness::Partial); }) ==
        "$.data.bogus");
  CHECK(error_path([&] { validate({{"days", 3}}, s, "delayTask", Direction::Request); }) == "$.data.task");
  CHECK(error_path([&] {
          validate({{"taskList", {{{"status", 5}}}}, {"s", "x"}}, s, "searchTask", Direction::Request,
                   Completeness::Partial);
        }) == "$.data.taskList[0].status");
  CHECK(error_path([&] { validate({{"taskList", {{"status", "x"}}}}, s, "searchTask", Direction::Request,
                                  Completeness::Partial); }) == "$.data.taskList");
  CHECK(error_of([&] { validate(json::object(), s, "nope", Direction::Request); }) == BridgeErrc::UnknownOperation);
}

TEST_CASE("fault envelopes parse as SOAP 1.1") {
  auto f = soap_fault("Client", "bad <input>");
  auto env = parse_soap(f);
  CHECK(env.body.local == "Fault");
  CHECK(env.body.children.at(1).text == "bad <input>");
}

TEST_CASE("round-trip laws over random payload trees") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 10000; ++seed) {
    test::RandomService gen(seed);
    gen.build();
    ServiceSchema schema(gen.desc);
    Direction dir = gen.chance(0.5) ? Direction::Request : Direction::Response;
    const auto* root = schema.body_element("op", dir);
    REQUIRE(root);
    TaskEnvelope t;
    t.operation = "op";
    t.direction = dir;
    t.correlation_id = "cid-" + std::to_string(seed);
    t.payload = gen.object(schema.children(*root), schema);
    if (dir == Direction::Request && gen.chance(0.5)) t.reply_to = "http://caller/cb/" + std::to_string(seed);

    CHECK_NOTHROW(validate(t.payload, schema, "op", dir));

    // canonical -> SOAP text -> canonical
    auto soap = canonical_to_soap(t, &schema);
    auto text = serialize_soap(soap);
    auto parsed = parse_soap(text);
    CHECK_MESSAGE(parsed == soap, "seed " << seed);
    auto back = soap_to_canonical(parsed, &schema, dir);
    CHECK_MESSAGE(back == t, "seed " << seed << "\n" << t.payload.dump() << "\n" << back.payload.dump());

    // SOAP -> canonical -> SOAP
    CHECK(canonical_to_soap(back, &schema) == parsed);

    // JSON -> canonical -> JSON is byte-identical
    auto bytes = canonical_to_json(t);
    auto from_json = json_to_canonical(bytes, dir);
    TaskEnvelope expected = t;
    expected.reply_to.clear();
    CHECK(from_json == expected);
    CHECK(canonical_to_json(from_json) == bytes);
    ++checked;
  }
  CHECK(checked == 10000);
}
