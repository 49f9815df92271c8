#pragma once

#include <string>

namespace tlf {

// Name of the environment variable read by init_logging_from_env().
inline constexpr const char* kLogLevelEnv = "TLF_LOG_LEVEL";

// Levels: trace, debug, info, warn, error, off. Unknown names are ignored.
void set_log_level(const std::string& level);
// Applies TLF_LOG_LEVEL if set; the default level is warn.
void init_logging_from_env();

}  // namespace tlf
