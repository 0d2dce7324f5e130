#pragma once

#include <spdlog/spdlog.h>

namespace landing {

// Shared logger; level taken from LANDING_LOG (error|info|debug), default error.
spdlog::logger& log();

}  // namespace landing
