#include "keypos/serial.hpp"

namespace keypos {

std::uint64_t fnv1a64(const void* data, std::size_t n)
{
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace keypos
