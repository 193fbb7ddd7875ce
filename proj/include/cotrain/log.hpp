#pragma once

#include <string_view>

namespace cotrain::log {

enum class Level { quiet = 0, info = 1, debug = 2 };

/// Level from the COTRAIN_LOG environment variable (quiet|info|debug), default info.
Level level();
void set_level(Level level);

void info(std::string_view message);
void debug(std::string_view message);

}  // namespace cotrain::log
