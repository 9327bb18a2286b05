#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace qm {

// Stable CSV number formatting: %.17g round-trips doubles and never
// changes between runs or platforms for identical values.
inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_u64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace qm
