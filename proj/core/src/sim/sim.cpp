#include "muit/sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include "muit/engine/engine.hpp"
#include "../util/kv.hpp"

namespace muit::sim {

using nlohmann::json;

namespace {

constexpr std::string_view kWsdl = R"(<?xml version="1.0" encoding="UTF-8"?>
<wsdl:definitions name="simTask" targetNamespace="urn:muit:sim"
    xmlns:wsdl="http://schemas.xmlsoap.org/wsdl/" xmlns:soap="http://schemas.xmlsoap.org/wsdl/soap/"
    xmlns:xs="http://www.w3.org/2001/XMLSchema" xmlns:tns="urn:muit:sim">
  <wsdl:types>
    <xs:schema targetNamespace="urn:muit:sim" elementFormDefault="qualified">
      <xs:complexType name="Task">
        <xs:sequence>
          <xs:element name="task_name" type="xs:string"/>
          <xs:element name="status" type="xs:string"/>
        </xs:sequence>
      </xs:complexType>
      <xs:element name="approveTask" type="tns:Task"/>
      <xs:element name="approveTaskResponse">
        <xs:complexType><xs:sequence><xs:element name="status" type="xs:string"/></xs:sequence></xs:complexType>
      </xs:element>
    </xs:schema>
  </wsdl:types>
  <wsdl:message name="approveTaskRequest"><wsdl:part name="parameters" element="tns:approveTask"/></wsdl:message>
  <wsdl:message name="approveTaskResponse"><wsdl:part name="parameters" element="tns:approveTaskResponse"/></wsdl:message>
  <wsdl:portType name="simTaskPortType">
    <wsdl:operation name="approveTask">
      <wsdl:input message="tns:approveTaskRequest"/><wsdl:output message="tns:approveTaskResponse"/>
    </wsdl:operation>
  </wsdl:portType>
  <wsdl:binding name="simTaskBinding" type="tns:simTaskPortType">
    <soap:binding style="document" transport="http://schemas.xmlsoap.org/soap/http"/>
    <wsdl:operation name="approveTask">
      <soap:operation soapAction="urn:approveTask"/>
      <wsdl:input><soap:body use="literal"/></wsdl:input><wsdl:output><soap:body use="literal"/></wsdl:output>
    </wsdl:operation>
  </wsdl:binding>
  <wsdl:service name="simTaskService">
    <wsdl:port name="simTaskPort" binding="tns:simTaskBinding"><soap:address location="http://sim.invalid/svc/sim"/></wsdl:port>
  </wsdl:service>
</wsdl:definitions>
)";

constexpr std::string_view kModule = R"(entity Task {
  String task_name: "load test";
  String status: "waiting";
}

operation approveTask(Task t) {
  t.status = "approved";
}

var taskname = "load test";

screen approveTask {
  header("Approve");
  handler {
    button { "approve", onClick = {approveTask(taskname);} }
  }
}
)";

const engine::Deployment& sim_deployment() {
  static const engine::Deployment d = engine::make_deployment("sim", kModule, kWsdl, "");
  return d;
}

std::string request_soap(std::uint64_t index, bool sync) {
  std::string header = "<wsa:MessageID>urn:sim:" + std::to_string(index) + "</wsa:MessageID>";
  if (!sync)
    header += "<wsa:ReplyTo><wsa:Address>http://sim.invalid/callback/" + std::to_string(index) +
              "</wsa:Address></wsa:ReplyTo>";
  return "<soapenv:Envelope xmlns:soapenv=\"http://schemas.xmlsoap.org/soap/envelope/\" "
         "xmlns:wsa=\"http://www.w3.org/2005/08/addressing\" xmlns:t=\"urn:muit:sim\"><soapenv:Header>" +
         header +
         "</soapenv:Header><soapenv:Body><t:approveTask><t:task_name>load test</t:task_name>"
         "<t:status>waiting</t:status></t:approveTask></soapenv:Body></soapenv:Envelope>";
}

// Counts callbacks instead of sending them.
struct CallbackSink final : engine::HttpClient {
  std::uint64_t posts = 0;
  int post(const std::string&, const std::string&, const std::string&,
           const std::vector<std::pair<std::string, std::string>>&) override {
    ++posts;
    return 200;
  }
};

// Uniform [0,1) from the top 53 bits; identical on every platform, unlike
// the standard distributions.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class Simulation {
 public:
  explicit Simulation(const WorkloadSpec& spec)
      : spec_(spec),
        clock_(0),
        sink_(std::make_shared<CallbackSink>()),
        engine_(make_config(spec), nullptr, clock_, sink_, [this] { return next_id(); }),
        rng_(spec.seed) {
    engine_.deploy(sim_deployment());
  }

  RunReport run() {
    report_.spec = spec_;
    for (int c = 0; c < spec_.n; ++c) {
      remaining_.push_back(spec_.requests_per_client);
      schedule(0.0, Event::Issue, static_cast<std::size_t>(c));
    }
    loop();
    finish();
    return std::move(report_);
  }

 private:
  enum class Event { Issue, ThinkEnd, Passivate };
  enum class Phase { Waiting, Thinking, Passivated, Processing, Done };

  struct Scheduled {
    double at;
    std::uint64_t seq;
    Event kind;
    std::size_t target;  // client for Issue, request otherwise
    bool operator>(const Scheduled& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };
  struct Job {
    double finish_work;
    std::uint64_t seq;
    std::size_t request;
    bool operator>(const Job& o) const { return finish_work != o.finish_work ? finish_work > o.finish_work : seq > o.seq; }
  };
  struct Request {
    RequestRecord record;
    std::string id;
    Phase phase = Phase::Waiting;
    bool resumed = false;  // waiting for a worker after its human answered
  };

  static engine::EngineConfig make_config(const WorkloadSpec& s) {
    engine::EngineConfig c;
    c.public_url = "http://sim.invalid";
    // The simulation passivates explicitly; the manager only checks the threshold.
    c.instances.idle_threshold = static_cast<instance::Millis>(std::floor(s.idle_threshold_s * 1000.0));
    c.instances.queue_capacity = static_cast<std::size_t>(s.n) * 2 + 16;
    c.callback_attempts = 1;
    c.retry_backoff = std::chrono::milliseconds(0);
    return c;
  }

  std::string next_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sim-%08llu", static_cast<unsigned long long>(++ids_));
    if (first_id_.empty()) first_id_ = buf;
    return buf;
  }

  void schedule(double at, Event kind, std::size_t target) { events_.push({at, seq_++, kind, target}); }

  double rate() const {
    return 1.0 / (1.0 + spec_.idle_cost * static_cast<double>(idle_) +
                  spec_.passivated_cost * static_cast<double>(passivated_) +
                  spec_.parked_cost * static_cast<double>(parked_));
  }

  void advance(double t) {
    double dt = t - now_;
    if (dt > 0) {
      // Peaks count only states that last: an instance passivated at the
      // instant it goes idle never held its worker.
      report_.peak_live = std::max(report_.peak_live, live_);
      report_.peak_processing = std::max(report_.peak_processing, jobs_.size());
      work_ += dt * rate();
      report_.live_instance_seconds += dt * static_cast<double>(live_);
      now_ = t;
      clock_.set(static_cast<instance::Millis>(std::llround(now_ * 1000.0)));
    }
  }

  void loop() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    while (!events_.empty() || !jobs_.empty()) {
      double t_event = events_.empty() ? inf : events_.top().at;
      double t_job = jobs_.empty() ? inf : now_ + (jobs_.top().finish_work - work_) / rate();
      if (t_job <= t_event) {
        advance(t_job);
        auto job = jobs_.top();
        jobs_.pop();
        work_ = std::max(work_, job.finish_work);
        complete(job.request);
      } else {
        auto e = events_.top();
        events_.pop();
        advance(e.at);
        switch (e.kind) {
          case Event::Issue: issue(e.target); break;
          case Event::ThinkEnd: think_end(e.target); break;
          case Event::Passivate: passivate(e.target); break;
        }
      }
    }
  }

  void issue(std::size_t client) {
    if (remaining_[client] == 0) return;
    --remaining_[client];
    Request r;
    r.record.index = requests_.size();
    r.record.client = static_cast<int>(client);
    r.record.delayed = uniform(rng_) < spec_.delayed_fraction;
    r.record.sync = uniform(rng_) < spec_.sync_fraction;
    r.record.issued_at = now_;
    ++report_.issued;

    first_id_.clear();
    auto h = engine_.handle_soap("sim", request_soap(r.record.index, r.record.sync));
    std::size_t k = requests_.size();
    if (h.response.status >= 300) {
      r.record.faulted = true;
      r.phase = Phase::Done;
      requests_.push_back(std::move(r));
      ++report_.faulted;
      // A rejected caller retries with its next request after one service time.
      schedule(now_ + spec_.service_time_s, Event::Issue, client);
      return;
    }
    r.id = first_id_;
    if (h.park_token)
      engine_.park(*h.park_token, [this](engine::HttpResponse resp) {
        if (resp.status == 200) ++parked_answers_;
      });
    requests_.push_back(std::move(r));
    if (live_ < static_cast<std::size_t>(spec_.workers))
      start(k);
    else
      waiting_.push_back(k);
  }

  void take_worker() { ++live_; }

  void release_worker() {
    --live_;
    while (!waiting_.empty() && live_ < static_cast<std::size_t>(spec_.workers)) {
      auto k = waiting_.front();
      waiting_.pop_front();
      if (requests_[k].resumed)
        restore(k);
      else
        start(k);
    }
  }

  void start(std::size_t k) {
    take_worker();
    auto& r = requests_[k];
    if (!r.record.delayed) return process(k);
    r.phase = Phase::Thinking;
    ++idle_;
    schedule(now_ + spec_.delay_s, Event::ThinkEnd, k);
    if (spec_.passivation && spec_.idle_threshold_s < spec_.delay_s)
      schedule(now_ + spec_.idle_threshold_s, Event::Passivate, k);
  }

  void passivate(std::size_t k) {
    auto& r = requests_[k];
    if (r.phase != Phase::Thinking) return;
    engine_.instances().passivate(r.id);
    r.phase = Phase::Passivated;
    --idle_;
    ++passivated_;
    if (r.record.sync) ++parked_;
    report_.peak_passivated = std::max(report_.peak_passivated, passivated_);
    release_worker();
  }

  void think_end(std::size_t k) {
    auto& r = requests_[k];
    if (r.phase == Phase::Thinking) {
      --idle_;
      return process(k);
    }
    if (r.phase != Phase::Passivated) return;
    r.resumed = true;
    if (live_ < static_cast<std::size_t>(spec_.workers))
      restore(k);
    else
      waiting_.push_back(k);
  }

  void restore(std::size_t k) {
    auto& r = requests_[k];
    --passivated_;
    if (r.record.sync) --parked_;
    take_worker();
    process(k);
  }

  void process(std::size_t k) {
    requests_[k].phase = Phase::Processing;
    jobs_.push({work_ + spec_.service_time_s, seq_++, k});
  }

  void complete(std::size_t k) {
    auto& r = requests_[k];
    auto resp = engine_.submit_result(r.id, R"({"op":"approveTask","data":{}})");
    r.phase = Phase::Done;
    r.record.latency_s = now_ - r.record.issued_at;
    if (resp.status == 200 && resp.body.find("\"Completed\"") != std::string::npos) {
      ++report_.completed;
    } else {
      r.record.faulted = true;
      ++report_.faulted;
    }
    release_worker();
    schedule(now_, Event::Issue, static_cast<std::size_t>(r.record.client));
  }

  void finish() {
    std::vector<double> sample;
    for (const auto& r : requests_) {
      report_.requests.push_back(r.record);
      if (!r.record.delayed && !r.record.faulted) sample.push_back(r.record.latency_s);
    }
    report_.art_samples = sample.size();
    if (!sample.empty()) {
      double sum = 0;
      for (double v : sample) sum += v;
      report_.art_s = sum / static_cast<double>(sample.size());
      std::sort(sample.begin(), sample.end());
      auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sample.size())));
      report_.p95_s = sample[std::max<std::size_t>(rank, 1) - 1];
    }
    report_.delivered = sink_->posts + parked_answers_;
    report_.duration_s = now_;
  }

  WorkloadSpec spec_;
  instance::ManualClock clock_;
  std::shared_ptr<CallbackSink> sink_;
  engine::Engine engine_;
  std::mt19937_64 rng_;
  std::uint64_t ids_ = 0;
  std::string first_id_;  // instance id minted by the current request
  std::uint64_t seq_ = 0;
  std::uint64_t parked_answers_ = 0;

  double now_ = 0;
  double work_ = 0;  // cumulative processing progress of any one request
  std::size_t live_ = 0;
  std::size_t idle_ = 0;
  std::size_t passivated_ = 0;
  std::size_t parked_ = 0;

  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> events_;
  std::priority_queue<Job, std::vector<Job>, std::greater<>> jobs_;
  std::deque<std::size_t> waiting_;
  std::vector<int> remaining_;
  std::vector<Request> requests_;
  RunReport report_;
};

}  // namespace

void WorkloadSpec::validate() const {
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw SpecError(std::string(name) + " must be in [0, 1]");
  };
  if (n < 1) throw SpecError("n must be at least 1");
  if (requests_per_client < 1) throw SpecError("requests_per_client must be at least 1");
  fraction(sync_fraction, "sync_fraction");
  fraction(delayed_fraction, "delayed_fraction");
  if (!(service_time_s > 0) || !std::isfinite(service_time_s)) throw SpecError("service_time_s must be positive");
  if (!(delay_s >= 0) || !std::isfinite(delay_s)) throw SpecError("delay_s must be non-negative");
  if (!(idle_threshold_s >= 0) || !std::isfinite(idle_threshold_s))
    throw SpecError("idle_threshold_s must be non-negative");
  if (workers < 1) throw SpecError("workers must be at least 1");
  for (double c : {idle_cost, passivated_cost, parked_cost})
    if (!(c >= 0) || !std::isfinite(c)) throw SpecError("cost coefficients must be non-negative");
}

std::string WorkloadSpec::mode() const {
  if (sync_fraction <= 0.0) return "async";
  if (sync_fraction >= 1.0) return "sync";
  return "mixed";
}

json WorkloadSpec::to_json() const {
  return {{"n", n},
          {"requests_per_client", requests_per_client},
          {"sync_fraction", sync_fraction},
          {"service_time_s", service_time_s},
          {"delayed_fraction", delayed_fraction},
          {"delay_s", delay_s},
          {"passivation", passivation},
          {"idle_threshold_s", idle_threshold_s},
          {"workers", workers},
          {"seed", seed},
          {"idle_cost", idle_cost},
          {"passivated_cost", passivated_cost},
          {"parked_cost", parked_cost}};
}

json RunReport::to_json(bool with_requests) const {
  json j = {{"spec", spec.to_json()},
            {"issued", issued},
            {"completed", completed},
            {"faulted", faulted},
            {"delivered", delivered},
            {"art_s", art_s},
            {"p95_s", p95_s},
            {"art_samples", art_samples},
            {"peak_live", peak_live},
            {"peak_processing", peak_processing},
            {"peak_passivated", peak_passivated},
            {"live_instance_seconds", live_instance_seconds},
            {"duration_s", duration_s}};
  if (with_requests) {
    json rs = json::array();
    for (const auto& r : requests)
      rs.push_back({{"index", r.index},
                    {"client", r.client},
                    {"delayed", r.delayed},
                    {"sync", r.sync},
                    {"faulted", r.faulted},
                    {"issued_at", r.issued_at},
                    {"latency_s", r.latency_s}});
    j["requests"] = std::move(rs);
  }
  return j;
}

RunReport run(const WorkloadSpec& spec) {
  spec.validate();
  return Simulation(spec).run();
}

std::vector<RunReport> sweep(const WorkloadSpec& base, const std::vector<int>& ns) {
  std::vector<RunReport> out;
  for (int n : ns) {
    auto s = base;
    s.n = n;
    out.push_back(run(s));
  }
  return out;
}

std::string csv_row(const RunReport& r) {
  return std::to_string(r.spec.n) + "," + r.spec.mode() + "," + (r.spec.passivation ? "on" : "off") + "," +
         fixed(r.art_s, 4) + "," + fixed(r.p95_s, 4) + "," + std::to_string(r.peak_live);
}

void write_csv(std::ostream& out, const std::vector<RunReport>& reports) {
  out << "N,mode,passivation,ART_s,p95_s,peak_live\n";
  for (const auto& r : reports) out << csv_row(r) << '\n';
}

SimulationPlan parse_plan(std::string_view text) {
  boost::property_tree::ptree tree;
  try {
    tree = kv::read_key_values(text);
  } catch (const kv::SyntaxError& e) {
    throw SpecError(e.what());
  }
  SimulationPlan plan;
  auto& s = plan.spec;
  for (const auto& [name, sec] : tree) {
    if (name != "workload") throw SpecError("unknown section [" + name + "]");
    static const std::vector<std::string> known = {
        "n",      "n_values",        "requests_per_client", "sync_fraction", "service_time_s", "delayed_fraction",
        "delay_s", "passivation",    "idle_threshold_s",    "workers",       "seed",           "idle_cost",
        "passivated_cost",           "parked_cost"};
    for (const auto& [k, v] : sec)
      if (std::find(known.begin(), known.end(), k) == known.end()) throw SpecError("[workload] unknown key '" + k + "'");
    try {
      const std::string w = "[workload]";
      s.n = kv::number<int>(sec, w, "n", s.n, 1, 1e7);
      s.requests_per_client = kv::number<int>(sec, w, "requests_per_client", s.requests_per_client, 1, 1e6);
      s.sync_fraction = kv::number<double>(sec, w, "sync_fraction", s.sync_fraction, 0, 1);
      s.service_time_s = kv::number<double>(sec, w, "service_time_s", s.service_time_s, 1e-6, 1e6);
      s.delayed_fraction = kv::number<double>(sec, w, "delayed_fraction", s.delayed_fraction, 0, 1);
      s.delay_s = kv::number<double>(sec, w, "delay_s", s.delay_s, 0, 1e7);
      s.idle_threshold_s = kv::number<double>(sec, w, "idle_threshold_s", s.idle_threshold_s, 0, 1e7);
      s.workers = kv::number<int>(sec, w, "workers", s.workers, 1, 1e7);
      s.seed = kv::number<std::uint64_t>(sec, w, "seed", s.seed, 0, 9.007199254740992e15);
      s.idle_cost = kv::number<double>(sec, w, "idle_cost", s.idle_cost, 0, 1e3);
      s.passivated_cost = kv::number<double>(sec, w, "passivated_cost", s.passivated_cost, 0, 1e3);
      s.parked_cost = kv::number<double>(sec, w, "parked_cost", s.parked_cost, 0, 1e3);
    } catch (const kv::SyntaxError& e) {
      throw SpecError(e.what());
    }
    if (auto p = sec.get_optional<std::string>("passivation")) {
      if (*p == "on" || *p == "true")
        plan.passivation = {true};
      else if (*p == "off" || *p == "false")
        plan.passivation = {false};
      else if (*p == "both")
        plan.passivation = {false, true};
      else
        throw SpecError("[workload] passivation must be on, off or both");
      s.passivation = plan.passivation.back();
    }
    if (auto list = sec.get_optional<std::string>("n_values")) {
      plan.ns.clear();
      std::stringstream ss(*list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        boost::property_tree::ptree one;
        one.put("n", item.substr(item.find_first_not_of(' ') == std::string::npos ? 0 : item.find_first_not_of(' ')));
        try {
          plan.ns.push_back(kv::number<int>(one, "[workload]", "n", 0, 1, 1e7));
        } catch (const kv::SyntaxError& e) {
          throw SpecError(std::string("n_values: ") + e.what());
        }
      }
      if (plan.ns.empty()) throw SpecError("[workload] n_values is empty");
    } else if (sec.get_optional<std::string>("n")) {
      plan.ns = {s.n};
    }
  }
  s.validate();
  return plan;
}

}  // namespace muit::sim
