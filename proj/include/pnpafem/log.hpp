#pragma once

#include <string>

namespace pnpafem {

enum class LogLevel { error = 0, info = 1, debug = 2 };

/// Current verbosity, initialized once from the PNP_AFEM_LOG environment
/// variable (error|info|debug, default error).
LogLevel log_level();

void log_message(LogLevel level, const std::string& message);

inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }
inline void log_error(const std::string& m) { log_message(LogLevel::error, m); }

}  // namespace pnpafem
