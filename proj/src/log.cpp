#include "landing/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace landing {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* raw = std::getenv("LANDING_LOG");
  if (raw == nullptr) return spdlog::level::err;
  const std::string value(raw);
  if (value == "debug") return spdlog::level::debug;
  if (value == "info") return spdlog::level::info;
  if (value == "warn") return spdlog::level::warn;
  return spdlog::level::err;
}

}  // namespace

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto logger = spdlog::stderr_color_mt("landing");
    logger->set_level(level_from_env());
    logger->set_pattern("[%l] %v");
    return logger;
  }();
  return *instance;
}

}  // namespace landing
