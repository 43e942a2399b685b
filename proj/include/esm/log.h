#pragma once

#include <iostream>
#include <sstream>

namespace esm {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

// Level comes from the ESM_LOG environment variable (quiet|info|debug),
// default info. Resolved once per process.
LogLevel log_level();

namespace detail {
void log_line(const std::string& line);
}

template <typename... Ts>
void log_info(const Ts&... parts) {
    if (log_level() < LogLevel::info) return;
    std::ostringstream os;
    (os << ... << parts);
    detail::log_line(os.str());
}

template <typename... Ts>
void log_debug(const Ts&... parts) {
    if (log_level() < LogLevel::debug) return;
    std::ostringstream os;
    (os << ... << parts);
    detail::log_line(os.str());
}

}  // namespace esm
