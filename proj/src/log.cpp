#include "pnpafem/log.hpp"

#include <cstdlib>
#include <iostream>

namespace pnpafem {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("PNP_AFEM_LOG");
        if (!env) return LogLevel::error;
        const std::string s(env);
        if (s == "debug") return LogLevel::debug;
        if (s == "info") return LogLevel::info;
        return LogLevel::error;
    }();
    return level;
}

void log_message(LogLevel level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    (level == LogLevel::error ? std::cerr : std::clog) << message << '\n';
}

}  // namespace pnpafem
