#pragma once

#include <spdlog/spdlog.h>

namespace shredkit {

// Shared stderr logger. Level comes from SHREDKIT_LOG
// (trace|debug|info|warn|error|off), default warn.
spdlog::logger& log();

}  // namespace shredkit
