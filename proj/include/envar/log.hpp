#pragma once

#include <spdlog/spdlog.h>

namespace envar::log {

/// Logger named "envar-kit" writing to stderr; level from ENVAR_KIT_LOG
/// (trace, debug, info, warn, error, off). Defaults to warn.
spdlog::logger& get();

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
  get().warn(f, std::forward<Args>(args)...);
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  get().info(f, std::forward<Args>(args)...);
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args) {
  get().debug(f, std::forward<Args>(args)...);
}

}  // namespace envar::log
