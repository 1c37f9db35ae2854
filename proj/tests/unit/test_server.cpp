#include <doctest.h>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "muit/engine/config.hpp"
#include "muit/engine/server.hpp"

using namespace muit;
using namespace muit::engine;
using nlohmann::json;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(MUIT_TEST_DATA) + "/" + rel, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header_of(const HttpResponse& r, std::string name) {
  for (const auto& [k, v] : r.headers) {
    std::string key = k;
    for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (key == name) return v;
  }
  return {};
}

std::string sync_request() {
  auto s = slurp("soap/approve_task_request.xml");
  auto b = s.find("<wsa:ReplyTo>");
  auto e = s.find("</wsa:ReplyTo>") + 14;
  return s.erase(b, e - b);
}

struct Live {
  instance::SystemClock clock;
  std::unique_ptr<Engine> engine;
  std::unique_ptr<Server> server;
  BeastHttpClient client{std::chrono::seconds(10)};
  std::string base;

  explicit Live(std::chrono::milliseconds long_poll = std::chrono::milliseconds(5'000)) {
    EngineConfig cfg;
    cfg.routes = {{"manager", "log"}};
    engine = std::make_unique<Engine>(cfg, nullptr, clock, std::make_shared<BeastHttpClient>());
    engine->deploy(make_deployment("taskApproval", slurp("engine/task_service.muit"),
                                   slurp("engine/task_service.wsdl"), "manager"));
    ServerOptions o;
    o.port = 0;
    o.threads = 2;
    o.long_poll_timeout = long_poll;
    o.tick_interval = std::chrono::milliseconds(50);
    server = std::make_unique<Server>(*engine, o);
    server->start();
    base = server->address();
  }
  HttpResponse soap(const std::string& body, const std::vector<std::pair<std::string, std::string>>& h = {}) {
    return client.request("POST", base + "/svc/taskApproval", "text/xml; charset=utf-8", body, h);
  }
};

}  // namespace

TEST_CASE("server answers over real sockets") {
  Live live;
  CHECK(live.server->port() != 0);
  CHECK(live.base.rfind("http://127.0.0.1:", 0) == 0);

  auto m = live.client.get(live.base + "/metrics");
  CHECK(m.first == 200);
  CHECK(json::parse(m.second)["deployments"] == json{"taskApproval"});
  CHECK(live.client.get(live.base + "/nowhere").first == 404);

  auto undeployed = live.client.request("POST", live.base + "/svc/ghost", "text/xml", slurp("soap/approve_task_request.xml"));
  CHECK(undeployed.status == 404);
  CHECK(undeployed.body.find("Fault") != std::string::npos);
}

TEST_CASE("sync caller is answered on its parked connection") {
  Live live;
  auto pending = std::async(std::launch::async, [&] { return live.soap(sync_request()); });
  std::string id;
  for (int k = 0; k < 200 && id.empty(); ++k) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    auto ids = live.engine->instances().ids();
    if (!ids.empty() && live.engine->parked() == 1) id = ids[0];
  }
  REQUIRE_FALSE(id.empty());
  auto ui = live.client.get(live.base + "/task/" + id + "/ui");
  CHECK(ui.first == 200);
  auto result = live.client.request("POST", live.base + "/task/" + id + "/result", "application/json",
                                    R"({"op":"approveTask","data":{}})");
  CHECK(result.status == 200);
  auto answer = pending.get();
  CHECK(answer.status == 200);
  CHECK(answer.content_type.rfind("text/xml", 0) == 0);
  CHECK(answer.body.find("approveTaskResponse") != std::string::npos);
  CHECK(answer.body.find("approved") != std::string::npos);
}

TEST_CASE("long-poll timeout hands out a resume token that re-attaches") {
  Live live(std::chrono::milliseconds(200));
  auto first = live.soap(sync_request());
  CHECK(first.status == 202);
  auto token = header_of(first, std::string(kResumeHeader));
  REQUIRE_FALSE(token.empty());
  CHECK(first.body.find(token) != std::string::npos);
  CHECK(live.engine->parked() == 0);

  auto id = live.engine->instances().ids().at(0);
  live.client.request("POST", live.base + "/task/" + id + "/result", "application/json", "{}");
  auto resumed = live.soap("", {{"X-Muit-Resume-Token", token}});
  CHECK(resumed.status == 200);
  CHECK(resumed.body.find("approved") != std::string::npos);
}

TEST_CASE("async callback reaches the reply-to endpoint") {
  namespace asio = boost::asio;
  namespace http = boost::beast::http;
  asio::io_context ioc;
  asio::ip::tcp::acceptor acceptor(ioc, {asio::ip::make_address("127.0.0.1"), 0});
  auto port = acceptor.local_endpoint().port();
  std::promise<http::request<http::string_body>> received;
  std::thread listener([&] {
    auto socket = acceptor.accept();
    boost::beast::flat_buffer buf;
    http::request<http::string_body> req;
    http::read(socket, buf, req);
    http::response<http::string_body> res{http::status::ok, 11};
    res.keep_alive(false);
    res.prepare_payload();
    http::write(socket, res);
    received.set_value(std::move(req));
  });

  Live live;
  auto req = slurp("soap/approve_task_request.xml");
  auto b = req.find("http://bpel.example.org");
  auto e = req.find("</wsa:Address>");
  req.replace(b, e - b, "http://127.0.0.1:" + std::to_string(port) + "/callback");
  CHECK(live.soap(req).status == 202);
  auto id = live.engine->instances().ids().at(0);
  CHECK(live.client.request("POST", live.base + "/task/" + id + "/result", "application/json", "{}").status == 200);

  auto fut = received.get_future();
  REQUIRE(fut.wait_for(std::chrono::seconds(10)) == std::future_status::ready);
  auto cb = fut.get();
  listener.join();
  CHECK(cb.target() == "/callback");
  CHECK(cb.body().find("<wsa:RelatesTo>urn:uuid:6b29fc40-ca47-1067-b31d-00dd010662da</wsa:RelatesTo>") !=
        std::string::npos);
  CHECK(cb.body().find("approved") != std::string::npos);
}

TEST_CASE("binding a used port fails") {
  Live live;
  instance::SystemClock clock;
  Engine other(EngineConfig{}, nullptr, clock);
  ServerOptions o;
  o.port = live.server->port();
  Server second(other, o);
  CHECK_THROWS_AS(second.start(), std::system_error);
}

TEST_CASE("config file parsing") {
  auto c = parse_config(R"(
# engine
[server]
host = "0.0.0.0"
port = 9090
threads = 3
long_poll_timeout_s = 20

[instances]
idle_threshold_s = 30
queue_capacity = 500
instance_deadline_s = 3600
store_path = "state/instances.log"

[callbacks]
attempts = 5
backoff_ms = 50

[notify]
manager = "webhook:http://hooks.local/notify"
clerk = log

[deploy.taskApproval]
source = "task_service.muit"
wsdl = "/abs/task_service.wsdl"
recipient = "manager"
)",
                        "/etc/muit");
  CHECK(c.server.host == "0.0.0.0");
  CHECK(c.server.port == 9090);
  CHECK(c.server.threads == 3);
  CHECK(c.server.long_poll_timeout == std::chrono::seconds(20));
  CHECK(c.engine.public_url == "http://127.0.0.1:9090");
  CHECK(c.engine.instances.idle_threshold == 30'000);
  CHECK(c.engine.instances.queue_capacity == 500);
  CHECK(c.engine.instances.instance_deadline == 3'600'000);
  CHECK(c.store_path == "/etc/muit/state/instances.log");
  CHECK(c.engine.callback_attempts == 5);
  CHECK(c.engine.retry_backoff == std::chrono::milliseconds(50));
  CHECK(c.engine.routes.at("manager") == "webhook:http://hooks.local/notify");
  CHECK(c.engine.routes.at("clerk") == "log");
  REQUIRE(c.deployments.size() == 1);
  CHECK(c.deployments[0].name == "taskApproval");
  CHECK(c.deployments[0].source == "/etc/muit/task_service.muit");
  CHECK(c.deployments[0].wsdl == "/abs/task_service.wsdl");
  CHECK(c.deployments[0].recipient == "manager");

  auto defaults = parse_config("");
  CHECK(defaults.server.port == 8080);
  CHECK(defaults.engine.instances.idle_threshold == 60'000);
  CHECK(defaults.store_path.empty());
}

TEST_CASE("config errors are reported") {
  for (const char* bad : {"[server]\nport = 70000", "[server]\nport = abc", "[server]\nbogus = 1", "[nope]\na = 1",
                          "[notify]\nx = carrier-pigeon", "[deploy.x]\nsource = a.muit", "[server]\nport",
                          "[server]\nhost = \"open", "[instances]\nqueue_capacity = 1.5"})
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/muit.toml"), ConfigError);
}

TEST_CASE("configured deployments load from disk") {
  auto dir = std::filesystem::path(MUIT_TEST_DATA) / "engine";
  auto c = parse_config("[deploy.taskApproval]\nsource = task_service.muit\nwsdl = task_service.wsdl\n", dir);
  auto d = load_deployments(c);
  REQUIRE(d.size() == 1);
  CHECK(d[0].bundle.screens.size() == 2);
  c.deployments[0].wsdl = dir / "missing.wsdl";
  CHECK_THROWS_AS(load_deployments(c), ConfigError);
}
