#include "envar/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_sinks.h>

namespace envar::log {

spdlog::logger& get() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>("envar-kit",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("ENVAR_KIT_LOG")) level = spdlog::level::from_str(env);
    l->set_level(level);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace envar::log
