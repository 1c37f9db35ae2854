#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "muit/engine/engine.hpp"
#include "muit/engine/server.hpp"

namespace muit::engine {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeploySpec {
  std::string name;
  std::filesystem::path source;  // .muit module
  std::filesystem::path wsdl;
  std::string recipient;
};

struct AppConfig {
  EngineConfig engine;
  ServerOptions server;
  std::filesystem::path store_path;  // empty: in-memory store
  std::vector<DeploySpec> deployments;
};

// Reads a TOML-style key/value file:
//
//   [server]     host, port, threads, public_url, long_poll_timeout_s, tick_s
//   [instances]  idle_threshold_s, queue_capacity, instance_deadline_s, store_path
//   [callbacks]  attempts, backoff_ms
//   [notify]     <recipient> = "log" | "webhook:<url>"
//   [deploy.<name>]  source, wsdl, recipient
//
// Relative paths are resolved against `base_dir`. Comments start with '#'
// or ';' at the beginning of a line; string values may be quoted.
AppConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& file);

// Base URL for task links when none is configured; wildcard hosts map to
// loopback.
std::string default_public_url(const std::string& host, std::uint16_t port);

// Parses, checks and compiles every configured deployment.
std::vector<Deployment> load_deployments(const AppConfig& config);

}  // namespace muit::engine
