#pragma once

#include <cstdint>

namespace ctm {

/// Counter-based random stream. Draw k of substream s under seed is a pure
/// function of (seed, s, k), so outcomes never depend on evaluation order,
/// thread count, or host.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t substream, std::uint64_t counter = 0)
        : seed_(seed), substream_(substream), counter_(counter) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t substream() const noexcept { return substream_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 bits of resolution.
    double next_unit() noexcept;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t substream_ = 0;
    std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace ctm
