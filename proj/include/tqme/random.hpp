#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tqme {

/// Seeded, splittable pseudo-random stream (xoshiro256++ core with
/// splitmix64 seeding). Identical seeds give identical draw sequences,
/// independent of platform and of how sibling streams are consumed.
///
/// Parallel code never shares a stream: it derives one child stream per
/// work item (trial index, sweep point, ...), which keeps results
/// deterministic for a fixed root seed regardless of worker count.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    /// Next raw 64-bit word.
    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double next_double();

    /// Standard normal deviate (Box-Muller).
    double next_gaussian();

    /// Child stream for work item `stream_id`; depends only on this
    /// stream's seed, not on how many draws were consumed.
    RandomStream derive(std::uint64_t stream_id) const;

    /// Child stream keyed by a stable label.
    RandomStream derive(std::string_view label) const;

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

} // namespace tqme
