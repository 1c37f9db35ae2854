#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "muit/bridge/bridge.hpp"
#include "muit/codegen/bundle.hpp"
#include "muit/dsl/ast.hpp"
#include "muit/engine/http.hpp"
#include "muit/engine/notify.hpp"
#include "muit/instance/manager.hpp"

namespace muit::engine {

// Custom header carrying a sync caller's resume token.
inline constexpr std::string_view kResumeHeader = "x-muit-resume-token";
inline constexpr std::string_view kEngineNs = "urn:muit:engine";

class DeploymentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One deployed task service: its compiled UI, the schema of its WSDL and the
// DSL module whose operations turn device results into responses.
struct Deployment {
  std::string name;
  codegen::PageBundle bundle;
  std::shared_ptr<const bridge::ServiceSchema> schema;
  std::shared_ptr<const dsl::DslModule> module;  // null: responses copy fields by name
  std::string recipient;  // stakeholder notified of new tasks

  std::string endpoint() const { return "/svc/" + name; }
};

// Parses, checks and compiles `muit_source` and reads `wsdl_document`.
// Throws DeploymentError with the diagnostics on failure.
Deployment make_deployment(const std::string& name, std::string_view muit_source, std::string_view wsdl_document,
                           const std::string& recipient);

struct EngineConfig {
  std::string public_url = "http://127.0.0.1:8080";  // base of notification deep links
  instance::ManagerConfig instances;
  std::map<std::string, std::string> routes;  // recipient -> "log" | "webhook:<url>"
  int callback_attempts = 3;
  std::chrono::milliseconds retry_backoff{200};
};

struct EngineCounters {
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t callbacks_posted = 0;
  std::uint64_t callback_failures = 0;
  std::uint64_t parked_answered = 0;
  std::uint64_t results_accepted = 0;
  std::uint64_t results_rejected = 0;
  std::uint64_t notifications_sent = 0;
  std::uint64_t notifications_undeliverable = 0;

  nlohmann::json to_json() const;
};

struct Handled {
  HttpResponse response;
  // Set when a sync caller has to wait: the transport parks the connection
  // under this token. `response` is then what to send if the wait is given up.
  std::optional<std::string> park_token;
};

using Executor = std::function<void(std::function<void()>)>;

// Transport-independent request handling. Thread-safe.
class Engine {
 public:
  Engine(EngineConfig config, std::shared_ptr<instance::InstanceStore> store, const instance::Clock& clock,
         std::shared_ptr<HttpClient> client = nullptr,
         std::function<std::string()> id_generator = instance::random_id);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Runs callback and webhook deliveries; inline when unset.
  void set_executor(Executor executor);

  void deploy(Deployment deployment);
  std::vector<std::string> deployments() const;
  // Reloads persisted instances and the sync-device sequence numbers.
  std::size_t recover();

  Handled handle(const HttpRequest& request);

  Handled handle_soap(const std::string& service, std::string_view body, const std::string& resume_token = {});
  HttpResponse serve_task_ui(const std::string& instance_id);
  HttpResponse submit_result(const std::string& instance_id, std::string_view body);
  HttpResponse sync(std::string_view body);
  HttpResponse metrics() const;
  HttpResponse bundle_asset(const std::string& service, const std::string& path) const;

  using Waiter = std::function<void(HttpResponse)>;
  // Registers the connection waiting on `token` and returns a ticket. The
  // waiter runs exactly once, immediately if the answer is already there.
  std::uint64_t park(const std::string& token, Waiter waiter);
  // Withdraws a waiter; false when it has already run.
  bool unpark(const std::string& token, std::uint64_t ticket);
  // Keeps an answer whose connection failed while it was being written.
  void return_answer(const std::string& token, HttpResponse response);
  std::size_t parked() const;

  // Passivates idle instances and expires overdue ones.
  void tick();

  instance::InstanceManager& instances() { return manager_; }
  const instance::InstanceManager& instances() const { return manager_; }
  std::vector<NotificationRecord> notifications() const;
  EngineCounters counters() const;
  const EngineConfig& config() const { return config_; }

 private:
  std::shared_ptr<const Deployment> deployment(const std::string& name) const;
  void deliver(const instance::DeliveryAction& action);
  void answer(const std::string& token, HttpResponse response);
  void notify(const Deployment& d, const instance::HandlingInstance& i);
  void post_callback(const std::string& url, const std::string& soap);
  HttpResponse apply_result(const std::string& instance_id, std::string_view body);
  bridge::TaskEnvelope build_response(const Deployment& d, const instance::HandlingInstance& i,
                                      const nlohmann::json& data) const;

  EngineConfig config_;
  std::shared_ptr<instance::InstanceStore> store_;
  const instance::Clock& clock_;
  std::shared_ptr<HttpClient> client_;
  instance::InstanceManager manager_;
  Executor executor_;

  mutable std::mutex deploy_mu_;
  std::shared_ptr<const std::map<std::string, std::shared_ptr<const Deployment>>> deployments_;

  mutable std::mutex park_mu_;
  struct Parked {
    std::uint64_t ticket;
    Waiter waiter;
  };
  std::map<std::string, Parked> waiting_;
  std::map<std::string, HttpResponse> mailbox_;
  std::map<std::string, std::string> tokens_;  // resume token -> instance id
  std::map<std::string, std::string> cids_;    // service + '\n' + correlation id -> instance id
  std::uint64_t next_ticket_ = 1;

  std::mutex sync_mu_;

  mutable std::mutex notify_mu_;
  std::vector<NotificationRecord> notifications_;
  std::map<std::string, std::shared_ptr<Notifier>> notifiers_;

  std::atomic<std::uint64_t> accepted_{0}, rejected_{0}, callbacks_posted_{0}, callback_failures_{0},
      parked_answered_{0}, results_accepted_{0}, results_rejected_{0}, notifications_sent_{0},
      notifications_undeliverable_{0};
};

}  // namespace muit::engine
