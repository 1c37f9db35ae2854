#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "muit/engine/http.hpp"

namespace muit::engine {

struct Notification {
  std::string instance_id;
  std::string recipient;
  std::string title;      // task name
  std::string deep_link;  // URL of the instance's task UI

  nlohmann::json to_json() const;
  friend bool operator==(const Notification&, const Notification&) = default;
};

struct NotificationRecord {
  Notification notification;
  std::string channel;  // "log", "webhook:<url>" or empty when unrouted
  bool delivered = false;
  std::int64_t at_ms = 0;
  std::string error;
};

// Delivery channel for notifications; throws on failure.
class Notifier {
 public:
  virtual ~Notifier() = default;
  virtual void send(const Notification& n) = 0;
  virtual std::string channel() const = 0;
};

// Writes "<title> <deep link>" to the engine log.
class LogNotifier final : public Notifier {
 public:
  void send(const Notification& n) override;
  std::string channel() const override { return "log"; }
};

// POSTs the notification as JSON to a URL.
class WebhookNotifier final : public Notifier {
 public:
  WebhookNotifier(std::string url, std::shared_ptr<HttpClient> client) : url_(std::move(url)), client_(std::move(client)) {}
  void send(const Notification& n) override;
  std::string channel() const override { return "webhook:" + url_; }

 private:
  std::string url_;
  std::shared_ptr<HttpClient> client_;
};

// Builds a notifier from a route spec: "log" or "webhook:<url>"; null when
// the spec is not recognized.
std::unique_ptr<Notifier> make_notifier(const std::string& spec, std::shared_ptr<HttpClient> client);

}  // namespace muit::engine
