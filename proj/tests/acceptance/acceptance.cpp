// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "muit/bridge/bridge.hpp"
#include "muit/dsl/checker.hpp"
#include "muit/dsl/parser.hpp"
#include "muit/engine/engine.hpp"
#include "muit/instance/manager.hpp"
#include "muit/sim/sim.hpp"
#include "muit/wsdl/wsdl.hpp"
#include "../unit/random_service.hpp"

namespace fs = std::filesystem;
using namespace muit;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path data_dir() { return MUIT_TEST_DATA; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Grammar corpus ------------------------------------------------------------

Verdict grammar_corpus() {
  struct Shape {
    const char* file;
    std::size_t entities, operations, screens, widgets, touches;
  };
  const Shape corpus[] = {
      {"device_type.muit", 0, 0, 1, 0, 0},   {"data_model.muit", 2, 5, 0, 0, 0},
      {"approve_task.muit", 2, 5, 1, 0, 0},  {"delay_task.muit", 2, 5, 1, 2, 0},
      {"screen_estate.muit", 2, 5, 2, 0, 0}, {"touch_swipe.muit", 0, 0, 1, 0, 1},
  };
  Verdict v;
  auto t0 = Clock::now();
  std::size_t errors = 0;
  for (const auto& c : corpus) {
    auto src = slurp(data_dir() / "corpus" / c.file);
    auto tokens = dsl::tokenize(src);
    auto parsed = dsl::parse(tokens.tokens);
    auto diags = tokens.diagnostics;
    diags.insert(diags.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
    auto checked = dsl::check(parsed.module);
    diags.insert(diags.end(), checked.begin(), checked.end());
    auto e = dsl::count_errors(diags);
    errors += e;
    v.expect(e == 0, std::string(c.file) + " has " + std::to_string(e) + " errors");
    const auto& m = parsed.module;
    v.expect(m.entities.size() == c.entities && m.operations.size() == c.operations &&
                 m.screens.size() == c.screens && m.widgets.size() == c.widgets && m.touches.size() == c.touches,
             std::string(c.file) + " shape differs");
  }
  // The approval module names its entities and operations.
  auto m = dsl::parse_source(slurp(data_dir() / "corpus" / "approve_task.muit")).module;
  for (const char* e : {"Task", "Role"}) v.expect(m.find_entity(e) != nullptr, std::string("missing entity ") + e);
  for (const char* o : {"import", "getTaskInfo", "approveTask", "delayTask", "searchTask"})
    v.expect(m.find_operation(o) != nullptr, std::string("missing operation ") + o);
  double secs = seconds_since(t0);
  v.expect(secs < 1.0, "runtime " + fmt("%.3fs", secs));
  v.detail = "6 modules, " + std::to_string(errors) + " errors, " + fmt("%.3fs", secs);
  return v;
}

// Fuzz totality --------------------------------------------------------------

// Inputs are random bytes, token soup and byte-level mutations of the corpus.
std::string fuzz_input(std::mt19937_64& rng, const std::vector<std::string>& seeds) {
  static const std::vector<std::string> words = {
      "entity", "operation", "screen", "widget", "touch", "var", "if", "else", "return", "{", "}", "(", ")",
      ";", ",", ".", "=", "==", "&&", "||", "!", "+", "-", "*", "/", "\"str\"", "'c'", "42", "3.5",
      "2014-07-21", "<div>", "</div>", "<", ">", "@", "#", "x", "Task", "int", "string", "[", "]", ":", "\n"};
  std::string s;
  switch (rng() % 3) {
    case 0: {
      std::size_t n = rng() % 256;
      for (std::size_t i = 0; i < n; ++i) s += static_cast<char>(rng() % 256);
      break;
    }
    case 1: {
      std::size_t n = rng() % 120;
      for (std::size_t i = 0; i < n; ++i) {
        s += words[rng() % words.size()];
        if (rng() % 2) s += ' ';
      }
      break;
    }
    default: {
      s = seeds[rng() % seeds.size()];
      std::size_t edits = 1 + rng() % 8;
      for (std::size_t e = 0; e < edits && !s.empty(); ++e) {
        std::size_t at = rng() % s.size();
        switch (rng() % 4) {
          case 0: s.erase(at, 1 + rng() % 16); break;
          case 1: s.insert(at, words[rng() % words.size()]); break;
          case 2: s[at] = static_cast<char>(rng() % 256); break;
          default: {
            std::size_t from = rng() % s.size();
            s.insert(at, s.substr(from, rng() % 40));
          }
        }
      }
    }
  }
  return s;
}

Verdict fuzz_totality() {
  constexpr int kInputs = 100'000;
  constexpr double kPerInputLimit = 0.100;
  Verdict v;
  std::vector<std::string> seeds;
  for (const auto& e : fs::directory_iterator(data_dir() / "corpus")) seeds.push_back(slurp(e.path()));

  // The run happens in a child so a crash is observed, not suffered.
  int fds[2];
  if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
  auto t0 = Clock::now();
  pid_t pid = ::fork();
  if (pid == 0) {
    ::close(fds[0]);
    ::alarm(600);
    std::mt19937_64 rng(20240721);
    double slowest = 0;
    long slow = 0;
    for (int i = 0; i < kInputs; ++i) {
      auto input = fuzz_input(rng, seeds);
      auto start = Clock::now();
      auto tokens = dsl::tokenize(input);
      auto parsed = dsl::parse(tokens.tokens);
      double secs = seconds_since(start);
      slowest = std::max(slowest, secs);
      slow += secs > kPerInputLimit;
      for (const auto& d : parsed.diagnostics)
        if (d.location.offset > input.size() + 1) ::_exit(4);
    }
    char buf[128];
    int n = std::snprintf(buf, sizeof buf, "%ld %.6f", slow, slowest);
    if (::write(fds[1], buf, static_cast<std::size_t>(n)) != n) ::_exit(3);
    ::_exit(0);
  }
  ::close(fds[1]);
  std::string report;
  char buf[128];
  for (ssize_t n; (n = ::read(fds[0], buf, sizeof buf)) > 0;) report.append(buf, static_cast<std::size_t>(n));
  ::close(fds[0]);
  int status = 0;
  ::waitpid(pid, &status, 0);
  double secs = seconds_since(t0);
  if (WIFSIGNALED(status)) {
    v.expect(false, "fuzz child died with signal " + std::to_string(WTERMSIG(status)));
    v.detail = "crashed";
    return v;
  }
  v.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "fuzz child exit " + std::to_string(WEXITSTATUS(status)));
  long slow = 0;
  double slowest = 0;
  std::istringstream(report) >> slow >> slowest;
  v.expect(slow == 0, std::to_string(slow) + " inputs over 100ms");
  v.detail = std::to_string(kInputs) + " inputs, 0 crashes, slowest " + fmt("%.1fms", slowest * 1000) + ", total " +
             fmt("%.1fs", secs);
  return v;
}

// WSDL pipeline ----------------------------------------------------------------

Verdict wsdl_pipeline() {
  Verdict v;
  auto desc = wsdl::parse_wsdl(slurp(data_dir() / "wsdl" / "reimbursement_task.wsdl"));
  auto model = wsdl::transform(desc);
  auto src = wsdl::emit_intermediate_dsl(wsdl::generate_default_views(model));
  auto parsed = dsl::parse_source(src);
  auto diags = parsed.diagnostics;
  auto checked = dsl::check(parsed.module);
  diags.insert(diags.end(), checked.begin(), checked.end());
  auto errors = dsl::count_errors(diags);
  v.expect(errors == 0, std::to_string(errors) + " errors recompiling the emitted module");

  // Conservation: every WSDL operation becomes one model operation or one
  // controller event, and the module adds only the import stub.
  std::size_t ops = desc.operations.size();
  v.expect(ops == 1, "fixture has " + std::to_string(ops) + " operations");
  v.expect(model.model_operations.size() + model.controller_events.size() == ops, "operations not conserved");
  v.expect(parsed.module.operations.size() == ops + 1, "emitted module operation count");
  v.expect(parsed.module.find_operation("getTaskInfo") != nullptr, "getTaskInfo missing");

  // One entity per message, and one property per field of its part.
  v.expect(model.data_entities.size() == desc.messages.size(), "entity count differs from message count");
  std::size_t fields = 0, properties = 0;
  for (const auto& msg : desc.messages)
    for (const auto& part : msg.parts) fields += desc.fields_of(part.element).size();
  for (const auto& e : model.data_entities) properties += e.properties.size();
  v.expect(fields == properties, std::to_string(properties) + " properties for " + std::to_string(fields) + " fields");
  std::size_t emitted_entities = 0;
  for (const auto& e : model.data_entities) emitted_entities += parsed.module.find_entity(e.name) != nullptr;
  v.expect(emitted_entities == model.data_entities.size(), "entities dropped by emission");
  v.detail = std::to_string(ops) + " operation, " + std::to_string(model.data_entities.size()) + " entities, " +
             std::to_string(properties) + " properties, " + std::to_string(errors) + " errors";
  return v;
}

// Bridge size and round trips ------------------------------------------------

Verdict bridge_laws() {
  Verdict v;
  bridge::ServiceSchema task(wsdl::parse_wsdl(slurp(data_dir() / "wsdl" / "task_approval.wsdl")));
  auto soap = slurp(data_dir() / "soap" / "approve_task_request.xml");
  auto json_bytes = bridge::canonical_to_json(bridge::soap_to_canonical(bridge::parse_soap(soap), &task));
  double ratio = static_cast<double>(json_bytes.size()) / static_cast<double>(soap.size());
  v.expect(ratio <= 0.80, "JSON/SOAP ratio " + fmt("%.3f", ratio));

  int held = 0;
  for (std::uint64_t seed = 1; seed <= 10'000; ++seed) {
    test::RandomService gen(seed);
    gen.build();
    bridge::ServiceSchema schema(gen.desc);
    auto dir = gen.chance(0.5) ? bridge::Direction::Request : bridge::Direction::Response;
    bridge::TaskEnvelope t;
    t.operation = "op";
    t.direction = dir;
    t.correlation_id = "cid-" + std::to_string(seed);
    t.payload = gen.object(schema.children(*schema.body_element("op", dir)), schema);
    if (dir == bridge::Direction::Request && gen.chance(0.5)) t.reply_to = "http://caller/cb/" + std::to_string(seed);
    try {
      auto soap_doc = bridge::canonical_to_soap(t, &schema);
      auto parsed = bridge::parse_soap(bridge::serialize_soap(soap_doc));
      auto back = bridge::soap_to_canonical(parsed, &schema, dir);
      auto bytes = bridge::canonical_to_json(t);
      auto from_json = bridge::json_to_canonical(bytes, dir);
      auto expected = t;
      expected.reply_to.clear();
      bool ok = parsed == soap_doc && back == t && bridge::canonical_to_soap(back, &schema) == parsed &&
                from_json == expected && bridge::canonical_to_json(from_json) == bytes;
      v.expect(ok, "round trip broken for seed " + std::to_string(seed));
      held += ok;
    } catch (const std::exception& e) {
      v.expect(false, "seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  v.detail = "JSON " + std::to_string(json_bytes.size()) + " / SOAP " + std::to_string(soap.size()) + " bytes = " +
             fmt("%.3f", ratio) + " (" + fmt("%.1f", (1 - ratio) * 100) + "% smaller), round trips " +
             std::to_string(held) + "/10000";
  return v;
}

// Passivation trend -----------------------------------------------------------

Verdict passivation_trend() {
  Verdict v;
  auto t0 = Clock::now();
  auto table = [] {
    std::vector<sim::RunReport> all;
    for (bool p : {false, true}) {
      sim::WorkloadSpec s;
      s.passivation = p;
      for (auto& r : sim::sweep(s, {100, 500, 800, 1000})) all.push_back(std::move(r));
    }
    return all;
  };
  auto first = table();
  auto second = table();
  double secs = seconds_since(t0) / 2;
  auto csv = [](const std::vector<sim::RunReport>& rs) {
    std::ostringstream out;
    sim::write_csv(out, rs);
    for (const auto& r : rs) out << r.to_json(true).dump();
    return out.str();
  };
  v.expect(csv(first) == csv(second), "reports differ between runs");
  auto art = [&](bool p, int n) {
    for (const auto& r : first)
      if (r.spec.passivation == p && r.spec.n == n) return r.art_s;
    return 0.0;
  };
  double service = sim::WorkloadSpec{}.service_time_s;
  v.expect(art(true, 100) <= 1.25 * service, "on ART at N=100 is " + fmt("%.4f", art(true, 100)));
  v.expect(art(true, 1000) <= 2.5 * service, "on ART at N=1000 is " + fmt("%.4f", art(true, 1000)));
  for (int n : {800, 1000})
    v.expect(art(false, n) >= 3 * art(true, n), "off/on ratio at N=" + std::to_string(n) + " is " +
                                                    fmt("%.2f", art(false, n) / art(true, n)));
  v.expect(secs < 60, "sweep took " + fmt("%.1fs", secs));
  v.detail = "on ART " + fmt("%.4f", art(true, 100)) + "s@100, " + fmt("%.4f", art(true, 1000)) + "s@1000; off/on " +
             fmt("%.2f", art(false, 800) / art(true, 800)) + "x@800, " +
             fmt("%.2f", art(false, 1000) / art(true, 1000)) + "x@1000; identical reruns; sweep " + fmt("%.1fs", secs);
  return v;
}

// Instance state machine --------------------------------------------------------

bridge::TaskEnvelope approve_request(const std::string& cid) {
  bridge::TaskEnvelope t;
  t.operation = "approveTask";
  t.correlation_id = cid;
  t.payload = {{"task_name", "Employee Travel Fee Approval"}, {"status", "waiting for approval"}};
  return t;
}

bridge::TaskEnvelope approved() {
  bridge::TaskEnvelope r;
  r.operation = "approveTask";
  r.direction = bridge::Direction::Response;
  r.payload = {{"status", "approved"}};
  return r;
}

enum class Ev { Complete, Expire, Passivate, Fail, Touch, Restart };

bool legal(const std::vector<instance::State>& h) {
  if (h.empty() || h.front() != instance::State::Created) return false;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (!instance::transition_allowed(h[i - 1], h[i])) return false;
  return true;
}

// Plays one event sequence against one instance; false on any violation.
bool play(instance::Mode mode, const std::vector<Ev>& seq) {
  instance::ManualClock clock;
  auto store = std::make_shared<instance::MemoryStore>();
  std::size_t deliveries = 0;
  bool ok = true;
  auto make = [&] {
    auto m = std::make_unique<instance::InstanceManager>(instance::ManagerConfig{}, store, clock);
    m->set_delivery_sink([&](const instance::DeliveryAction& a) {
      ++deliveries;
      ok &= a.kind == (mode == instance::Mode::Async ? instance::DeliveryAction::Kind::PostCallback
                                                     : instance::DeliveryAction::Kind::AnswerParked);
    });
    return m;
  };
  auto m = make();
  auto id = m->create(approve_request("c"), mode, "http://cb", "manager", 100'000).instance_id;
  for (Ev e : seq) {
    clock.advance(60'000);
    try {
      switch (e) {
        case Ev::Complete: m->complete(id, approved()); break;
        case Ev::Expire: m->expire(clock.now()); break;
        case Ev::Passivate: m->passivate(id); break;
        case Ev::Fail: m->fail(id, "cancelled"); break;
        case Ev::Touch: m->touch(id); break;
        case Ev::Restart:
          m = make();
          m->recover();
          break;
      }
    } catch (const instance::InstanceError& err) {
      ok &= err.code() == instance::InstanceErrc::StateViolation || err.code() == instance::InstanceErrc::NotIdle;
    }
    ok &= deliveries <= 1 && legal(m->history(id));
  }
  auto last = m->history(id).back();
  return ok && deliveries == (instance::is_terminal(last) ? 1u : 0u);
}

// Kills a process mid-flight with passivated instances on disk and checks
// every one of them comes back and completes exactly once.
std::size_t crash_recovery(Verdict& v) {
  auto path = fs::temp_directory_path() / ("muit-acceptance-" + std::to_string(::getpid()) + ".log");
  fs::remove(path);
  int fds[2];
  if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
  pid_t pid = ::fork();
  if (pid == 0) {
    ::close(fds[0]);
    instance::ManualClock clock;
    instance::InstanceManager m({}, std::make_shared<instance::FileStore>(path), clock);
    for (int k = 0; k < 100; ++k) m.create(approve_request("c" + std::to_string(k)), instance::Mode::Async, "http://cb");
    clock.advance(60'000);
    m.passivate_idle();
    char ready = 'r';
    if (::write(fds[1], &ready, 1) != 1) ::_exit(3);
    for (;;) ::pause();
  }
  ::close(fds[1]);
  char ready = 0;
  bool got = ::read(fds[0], &ready, 1) == 1;
  ::close(fds[0]);
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
  v.expect(got, "crash child did not get ready");

  instance::ManualClock clock(120'000);
  std::size_t posted = 0;
  instance::InstanceManager m({}, std::make_shared<instance::FileStore>(path), clock);
  m.set_delivery_sink([&](const instance::DeliveryAction& a) {
    posted += a.kind == instance::DeliveryAction::Kind::PostCallback;
  });
  m.recover();
  std::size_t passivated = m.metrics().passivated;
  v.expect(passivated == 100, std::to_string(passivated) + "/100 PassivatedAsync instances recovered");
  for (const auto& id : m.ids()) m.complete(id, approved());
  for (const auto& id : m.ids()) m.complete(id, approved());
  v.expect(posted == 100, std::to_string(posted) + " callbacks for 100 recovered instances");
  fs::remove(path);
  return passivated;
}

Verdict state_machine() {
  Verdict v;
  const Ev events[] = {Ev::Complete, Ev::Expire, Ev::Passivate, Ev::Fail, Ev::Touch, Ev::Restart};
  std::size_t runs = 0, good = 0;
  std::vector<Ev> seq;
  std::function<void(std::size_t)> walk = [&](std::size_t depth) {
    for (auto mode : {instance::Mode::Async, instance::Mode::Sync}) {
      bool ok = play(mode, seq);
      ++runs;
      good += ok;
      v.expect(ok, "violation after " + std::to_string(seq.size()) + " events");
    }
    if (depth == 4) return;
    for (Ev e : events) {
      seq.push_back(e);
      walk(depth + 1);
      seq.pop_back();
    }
  };
  walk(0);
  auto recovered = crash_recovery(v);
  v.detail = std::to_string(good) + "/" + std::to_string(runs) + " interleavings exactly-once and legal; " +
             std::to_string(recovered) + "/100 passivated instances survive SIGKILL";
  return v;
}

// End-to-end conservation ----------------------------------------------------

struct CountingClient : engine::HttpClient {
  std::mutex mu;
  std::map<std::string, int> by_url;
  int post(const std::string& url, const std::string&, const std::string&,
           const std::vector<std::pair<std::string, std::string>>&) override {
    std::lock_guard lock(mu);
    ++by_url[url];
    return 200;
  }
};

std::string soap_request(const std::string& base, int k, bool sync) {
  std::string s = base;
  auto b = s.find("<wsa:MessageID>") + 15;
  s.replace(b, s.find("</wsa:MessageID>") - b, "urn:e2e:" + std::to_string(k));
  if (sync) {
    b = s.find("<wsa:ReplyTo>");
    s.erase(b, s.find("</wsa:ReplyTo>") + 14 - b);
  } else {
    b = s.find("http://bpel.example.org");
    s.replace(b, s.find("</wsa:Address>") - b, "http://caller.test/cb/" + std::to_string(k));
  }
  return s;
}

Verdict end_to_end() {
  constexpr int kRequests = 200;
  Verdict v;
  instance::ManualClock clock(1'000'000);
  auto client = std::make_shared<CountingClient>();
  engine::EngineConfig cfg;
  cfg.routes = {{"manager", "log"}};
  cfg.retry_backoff = std::chrono::milliseconds(0);
  cfg.instances.queue_capacity = 1000;
  std::atomic<int> next{0};
  engine::Engine eng(cfg, std::make_shared<instance::MemoryStore>(), clock, client,
                     [&] { return "e2e-" + std::to_string(++next); });
  eng.deploy(engine::make_deployment("taskApproval", slurp(data_dir() / "engine" / "task_service.muit"),
                                     slurp(data_dir() / "engine" / "task_service.wsdl"), "manager"));
  auto base = slurp(data_dir() / "soap" / "approve_task_request.xml");

  std::mt19937_64 rng(7);
  std::vector<bool> sync(kRequests);
  for (auto&& s : sync) s = rng() % 2;

  // Half the sync callers stay parked; the rest hang up and re-attach with
  // their resume token after the answer exists.
  std::mutex mu;
  std::map<std::string, int> answers;  // token -> answers received
  std::map<std::string, std::string> tokens;  // cid -> token
  int accepted = 0;
  for (int k = 0; k < kRequests; ++k) {
    auto h = eng.handle_soap("taskApproval", soap_request(base, k, sync[k]));
    accepted += h.response.status == 202;
    if (h.park_token) {
      tokens["urn:e2e:" + std::to_string(k)] = *h.park_token;
      if (k % 2 == 0)
        eng.park(*h.park_token, [&, t = *h.park_token](const engine::HttpResponse& r) {
          std::lock_guard lock(mu);
          answers[t] += r.status == 200;
        });
    }
  }
  v.expect(accepted == kRequests, std::to_string(accepted) + " accepted");

  std::map<std::string, std::string> id_of;  // cid -> instance
  for (const auto& id : eng.instances().ids())
    if (auto snap = eng.instances().find(id)) id_of[snap->request.correlation_id] = id;
  v.expect(id_of.size() == static_cast<std::size_t>(kRequests), "instances created " + std::to_string(id_of.size()));

  // Results arrive from four devices at once; every tenth is submitted twice.
  std::vector<std::string> ids;
  for (const auto& [cid, id] : id_of) ids.push_back(id);
  std::atomic<int> ok{0}, replays{0}, replay_ok{0};
  std::vector<std::thread> devices;
  for (int t = 0; t < 4; ++t)
    devices.emplace_back([&, t] {
      for (std::size_t k = static_cast<std::size_t>(t); k < ids.size(); k += 4) {
        auto r = eng.submit_result(ids[k], R"({"op":"approveTask","data":{}})");
        ok += r.status == 200;
        if (k % 10 == 0) {
          ++replays;
          auto again = eng.submit_result(ids[k], R"({"op":"approveTask","data":{}})");
          replay_ok += again.status == 200 && again.body.find("AlreadyCompleted") != std::string::npos;
        }
      }
    });
  for (auto& d : devices) d.join();
  v.expect(ok == kRequests, std::to_string(ok.load()) + " results accepted");
  v.expect(replay_ok == replays, "replays not idempotent");

  // Detached sync callers come back for their answers.
  std::size_t reattached = 0;
  for (const auto& [cid, token] : tokens) {
    if (answers.count(token)) continue;
    auto h = eng.handle_soap("taskApproval", "", token);
    if (h.park_token)
      eng.park(*h.park_token, [&, t = token](const engine::HttpResponse& r) {
        std::lock_guard lock(mu);
        answers[t] += r.status == 200;
      });
    else if (h.response.status == 200)
      answers[token] += 1;
    ++reattached;
  }

  std::size_t terminal = 0, delivered = 0;
  for (const auto& id : ids)
    if (auto st = eng.instances().state(id); st && instance::is_terminal(*st)) ++terminal;
  for (const auto& [url, n] : client->by_url) {
    delivered += static_cast<std::size_t>(n);
    v.expect(n == 1, url + " received " + std::to_string(n) + " callbacks");
  }
  for (const auto& [token, n] : answers) {
    delivered += static_cast<std::size_t>(n);
    v.expect(n == 1, "sync answer delivered " + std::to_string(n) + " times");
  }
  v.expect(terminal == static_cast<std::size_t>(accepted), "terminal " + std::to_string(terminal));
  v.expect(delivered == static_cast<std::size_t>(accepted), "delivered " + std::to_string(delivered));
  v.expect(eng.instances().metrics().already_completed == static_cast<std::uint64_t>(replays.load()),
           "already_completed metric");

  // Replaying the original SOAP requests creates nothing new.
  for (int k = 0; k < kRequests; k += 10) eng.handle_soap("taskApproval", soap_request(base, k, sync[k]));
  v.expect(eng.instances().ids().size() == static_cast<std::size_t>(kRequests), "SOAP replay created instances");

  std::size_t async_n = client->by_url.size();
  v.detail = "accepted " + std::to_string(accepted) + " (" + std::to_string(async_n) + " async, " +
             std::to_string(tokens.size()) + " sync, " + std::to_string(reattached) + " re-attached), terminal " +
             std::to_string(terminal) + ", delivered " + std::to_string(delivered) + "; " +
             std::to_string(replays.load()) + " replays, 0 extra deliveries";
  v.expect(delivered == static_cast<std::size_t>(kRequests), "extra deliveries after replay");
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"grammar corpus", grammar_corpus},   {"fuzz totality", fuzz_totality},
      {"wsdl pipeline", wsdl_pipeline},     {"bridge size and round trips", bridge_laws},
      {"passivation trend", passivation_trend}, {"instance state machine", state_machine},
      {"end-to-end conservation", end_to_end},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
    for (const auto& f : v.failures) std::printf("     - %s\n", f.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
