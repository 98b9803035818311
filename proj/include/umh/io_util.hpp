#pragma once

#include <cstdio>
#include <string>

namespace umh {

/// Shortest round-trip decimal form of a double; keeps CSV output byte-stable.
inline std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace umh
