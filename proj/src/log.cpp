#include "simlmc/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace simlmc::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;
}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void warn(std::string_view msg) {
    if (g_level.load() < Level::warn) return;
    std::lock_guard lock(g_mutex);
    std::clog << "warning: " << msg << '\n';
}

void info(std::string_view msg) {
    if (g_level.load() < Level::info) return;
    std::lock_guard lock(g_mutex);
    std::clog << msg << '\n';
}

}  // namespace simlmc::log
