#include "ctm/rng.hpp"

namespace ctm {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t RngStream::next_u64() noexcept {
    const std::uint64_t key = mix64(seed_ ^ mix64(substream_ + 0x632BE59BD9B4E019ULL));
    return mix64(key ^ mix64(counter_++));
}

double RngStream::next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

} // namespace ctm
