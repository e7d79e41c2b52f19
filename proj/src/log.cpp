#include "shredkit/log.hpp"

#include <cstdlib>
#include <memory>

#include <spdlog/sinks/stdout_sinks.h>

namespace shredkit {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>(
        "shredkit", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("SHREDKIT_LOG"); env && *env) {
      level = spdlog::level::from_str(env);
    }
    l->set_level(level);
    return l;
  }();
  return *logger;
}

}  // namespace shredkit
