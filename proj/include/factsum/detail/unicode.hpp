#pragma once

#include <cstdint>

#include <unicode/uchar.h>

namespace factsum::detail {

inline bool is_letter(std::int32_t cp) { return cp >= 0 && (U_GET_GC_MASK(cp) & U_GC_L_MASK) != 0; }
inline bool is_number(std::int32_t cp) { return cp >= 0 && (U_GET_GC_MASK(cp) & U_GC_N_MASK) != 0; }
inline bool is_mark(std::int32_t cp) { return cp >= 0 && (U_GET_GC_MASK(cp) & U_GC_M_MASK) != 0; }

// Python's str.isspace() set: Unicode White_Space plus the 0x1C-0x1F separators.
inline bool is_space(std::int32_t cp) {
    return cp >= 0 && ((cp >= 0x1C && cp <= 0x1F) || u_isUWhiteSpace(cp));
}

} // namespace factsum::detail
