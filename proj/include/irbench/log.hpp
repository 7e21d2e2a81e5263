#pragma once

#include <cstdio>
#include <mutex>
#include <string>

namespace irbench {

namespace detail {
inline std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}
inline bool& quiet_flag() {
    static bool q = false;
    return q;
}
}  // namespace detail

inline void set_quiet(bool q) { detail::quiet_flag() = q; }

inline void log_warn(const std::string& msg) {
    std::lock_guard lock(detail::log_mutex());
    std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

inline void log_info(const std::string& msg) {
    if (detail::quiet_flag()) return;
    std::lock_guard lock(detail::log_mutex());
    std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

}  // namespace irbench
