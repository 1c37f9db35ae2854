#include "muit/engine/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "../util/kv.hpp"

namespace muit::engine {

namespace pt = boost::property_tree;

template <typename T>
T number(const pt::ptree& section, const std::string& sect, const std::string& key, T fallback, double min,
         double max) {
  try {
    return kv::number<T>(section, "[" + sect + "]", key, fallback, min, max);
  } catch (const kv::SyntaxError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const pt::ptree& section, const std::string& name, std::initializer_list<std::string_view> known) {
  for (const auto& [k, v] : section)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ConfigError("[" + name + "] unknown key '" + k + "'");
}

}  // namespace

AppConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    tree = kv::read_key_values(text);
  } catch (const kv::SyntaxError& e) {
    throw ConfigError(e.what());
  }
  constexpr double kMaxSeconds = 365.0 * 24 * 3600;
  AppConfig c;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty()) throw ConfigError("key '" + name + "' outside a section");
    if (name == "server") {
      check_keys(section, name, {"host", "port", "threads", "public_url", "long_poll_timeout_s", "tick_s"});
      c.server.host = section.get("host", c.server.host);
      c.server.port = number<std::uint16_t>(section, name, "port", c.server.port, 0, 65535);
      c.server.threads = number<int>(section, name, "threads", c.server.threads, 1, 256);
      c.server.long_poll_timeout = std::chrono::milliseconds(number<std::int64_t>(
          section, name, "long_poll_timeout_s", c.server.long_poll_timeout.count() / 1000, 1, kMaxSeconds) * 1000);
      c.server.tick_interval = std::chrono::milliseconds(static_cast<std::int64_t>(
          number<double>(section, name, "tick_s", c.server.tick_interval.count() / 1000.0, 0.01, 3600) * 1000));
      c.engine.public_url = section.get("public_url", std::string());
    } else if (name == "instances") {
      check_keys(section, name, {"idle_threshold_s", "queue_capacity", "instance_deadline_s", "store_path"});
      auto& m = c.engine.instances;
      m.idle_threshold = static_cast<instance::Millis>(
          number<double>(section, name, "idle_threshold_s", m.idle_threshold / 1000.0, 0, kMaxSeconds) * 1000);
      m.queue_capacity = number<std::size_t>(section, name, "queue_capacity", m.queue_capacity, 1, 1e9);
      m.instance_deadline = static_cast<instance::Millis>(
          number<double>(section, name, "instance_deadline_s", m.instance_deadline / 1000.0, 0, kMaxSeconds) * 1000);
      if (auto p = section.get_optional<std::string>("store_path"); p && !p->empty())
        c.store_path = resolve(base_dir, *p);
    } else if (name == "callbacks") {
      check_keys(section, name, {"attempts", "backoff_ms"});
      c.engine.callback_attempts = number<int>(section, name, "attempts", c.engine.callback_attempts, 1, 100);
      c.engine.retry_backoff = std::chrono::milliseconds(
          number<std::int64_t>(section, name, "backoff_ms", c.engine.retry_backoff.count(), 0, 600'000));
    } else if (name == "notify") {
      for (const auto& [recipient, route] : section) {
        auto spec = route.data();
        if (!make_notifier(spec, nullptr))
          throw ConfigError("[notify] " + recipient + ": unknown route '" + spec + "'");
        c.engine.routes[recipient] = spec;
      }
    } else if (name.rfind("deploy.", 0) == 0) {
      check_keys(section, name, {"source", "wsdl", "recipient"});
      DeploySpec d;
      d.name = name.substr(7);
      auto source = section.get_optional<std::string>("source");
      auto wsdl = section.get_optional<std::string>("wsdl");
      if (!source || !wsdl) throw ConfigError("[" + name + "] needs source and wsdl");
      d.source = resolve(base_dir, *source);
      d.wsdl = resolve(base_dir, *wsdl);
      d.recipient = section.get("recipient", std::string());
      c.deployments.push_back(std::move(d));
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  if (c.engine.public_url.empty()) c.engine.public_url = default_public_url(c.server.host, c.server.port);
  return c;
}

std::string default_public_url(const std::string& host, std::uint16_t port) {
  bool any = host == "0.0.0.0" || host == "::";
  return "http://" + (any ? std::string("127.0.0.1") : host) + ":" + std::to_string(port);
}

AppConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

std::vector<Deployment> load_deployments(const AppConfig& config) {
  auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::vector<Deployment> out;
  for (const auto& d : config.deployments) {
    try {
      out.push_back(make_deployment(d.name, read(d.source), read(d.wsdl), d.recipient));
    } catch (const DeploymentError& e) {
      throw ConfigError("deployment " + d.name + ": " + e.what());
    }
  }
  return out;
}

}  // namespace muit::engine
