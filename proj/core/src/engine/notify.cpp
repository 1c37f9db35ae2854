#include "muit/engine/notify.hpp"

#include <stdexcept>

#include "../util/logger.hpp"

namespace muit::engine {

nlohmann::json Notification::to_json() const {
  return {{"instance", instance_id}, {"recipient", recipient}, {"title", title}, {"deep_link", deep_link}};
}

void LogNotifier::send(const Notification& n) {
  log::get().info("notify recipient={} title=\"{}\" link={}", n.recipient, n.title, n.deep_link);
}

void WebhookNotifier::send(const Notification& n) {
  if (!client_) throw std::runtime_error("no HTTP client for webhook");
  int status = client_->post(url_, "application/json", n.to_json().dump());
  if (status < 200 || status >= 300) throw std::runtime_error("webhook answered " + std::to_string(status));
}

std::unique_ptr<Notifier> make_notifier(const std::string& spec, std::shared_ptr<HttpClient> client) {
  if (spec == "log") return std::make_unique<LogNotifier>();
  if (spec.rfind("webhook:", 0) == 0 && parse_url(spec.substr(8)))
    return std::make_unique<WebhookNotifier>(spec.substr(8), std::move(client));
  return nullptr;
}

}  // namespace muit::engine
