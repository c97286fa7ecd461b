#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace lidscope::log {

using Sink = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}
inline Sink& sink() {
    static Sink s = [](const std::string& msg) { std::clog << "warning: " << msg << '\n'; };
    return s;
}
}  // namespace detail

/// Replace the warning sink. Returns the previous one so callers can restore it.
inline Sink set_warning_sink(Sink s) {
    std::lock_guard lock(detail::sink_mutex());
    return std::exchange(detail::sink(), std::move(s));
}

inline void warn(const std::string& msg) {
    std::lock_guard lock(detail::sink_mutex());
    if (detail::sink()) detail::sink()(msg);
}

/// RAII guard that silences or redirects warnings for a scope.
class ScopedSink {
public:
    explicit ScopedSink(Sink s) : previous_(set_warning_sink(std::move(s))) {}
    ~ScopedSink() { set_warning_sink(std::move(previous_)); }
    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    Sink previous_;
};

}  // namespace lidscope::log
