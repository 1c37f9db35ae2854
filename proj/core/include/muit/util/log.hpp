#pragma once

#include <string_view>

namespace muit::log {

// Levels: trace, debug, info, warn, error, off. Unknown names leave the
// level unchanged and return false.
bool set_level(std::string_view level);

// Applies MUIT_LOG when set, `fallback` otherwise.
void init_from_env(std::string_view fallback = "warn");

}  // namespace muit::log
