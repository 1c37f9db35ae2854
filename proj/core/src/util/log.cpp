#include <cstdlib>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>

#include "logger.hpp"
#include "muit/util/log.hpp"

namespace muit::log {

namespace {

std::shared_ptr<spdlog::logger> make() {
  auto l = std::make_shared<spdlog::logger>("muit", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  l->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
  const char* env = std::getenv("MUIT_LOG");
  l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
  return l;
}

}  // namespace

spdlog::logger& get() {
  static std::shared_ptr<spdlog::logger> logger = make();
  return *logger;
}

bool set_level(std::string_view level) {
  static const char* names[] = {"trace", "debug", "info", "warn", "error", "critical", "off"};
  for (const char* n : names) {
    if (level == n) {
      get().set_level(spdlog::level::from_str(n));
      return true;
    }
  }
  return false;
}

void init_from_env(std::string_view fallback) {
  const char* env = std::getenv("MUIT_LOG");
  if (!env || !set_level(env)) set_level(fallback);
}

}  // namespace muit::log
