#pragma once

#include <spdlog/spdlog.h>

namespace muit::log {

spdlog::logger& get();

}  // namespace muit::log
