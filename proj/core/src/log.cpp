#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tlf/logging.hpp"

namespace tlf {

void set_log_level(const std::string& level) {
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") return;
  spdlog::set_level(parsed);
}

void init_logging_from_env() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("tlf"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv(kLogLevelEnv)) set_log_level(level);
}

}  // namespace tlf
