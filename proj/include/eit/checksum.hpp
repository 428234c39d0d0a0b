#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace eit {

/// 64-bit FNV-1a hash, used for manifest and constants-file checksums.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Canonical text form: "fnv1a64:<16 lowercase hex digits>".
std::string checksum_string(std::string_view data);

}  // namespace eit
