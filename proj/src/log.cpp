#include "esm/log.h"

#include <cstdlib>
#include <cstring>
#include <mutex>

namespace esm {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("ESM_LOG");
        if (!env) return LogLevel::info;
        if (std::strcmp(env, "quiet") == 0) return LogLevel::quiet;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        return LogLevel::info;
    }();
    return level;
}

namespace detail {
void log_line(const std::string& line) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << line << "\n";
}
}  // namespace detail

}  // namespace esm
