#include "cotrain/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

namespace cotrain::log {

namespace {

std::optional<Level> g_override;
std::mutex g_mutex;

Level from_env() {
    const char* raw = std::getenv("COTRAIN_LOG");
    if (!raw) return Level::info;
    const std::string v(raw);
    if (v == "quiet") return Level::quiet;
    if (v == "debug") return Level::debug;
    return Level::info;
}

void emit(std::string_view tag, std::string_view message) {
    std::lock_guard lock(g_mutex);
    std::cerr << '[' << tag << "] " << message << '\n';
}

}  // namespace

Level level() { return g_override ? *g_override : from_env(); }
void set_level(Level l) { g_override = l; }

void info(std::string_view message) {
    if (level() >= Level::info) emit("info", message);
}

void debug(std::string_view message) {
    if (level() >= Level::debug) emit("debug", message);
}

}  // namespace cotrain::log
