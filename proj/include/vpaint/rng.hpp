#pragma once

#include <cstdint>
#include <string_view>

namespace vpaint {

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/**
 * Portable seeded generator: xoshiro256** with its state filled by SplitMix64.
 *
 * Independent streams come from `Rng::stream(seed, index)`, which depends only on
 * its arguments, so per-item randomness does not depend on scheduling order.
 * All derived draws (uniform doubles, bounded integers) use fixed formulas and
 * are identical on every platform.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    static Rng stream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next();
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform in [lo, hi); returns lo when lo == hi.
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n), n > 0 (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t s_[4];
};

/// FNV-1a over the bytes of `text`; used to key per-frame streams by frame id.
std::uint64_t fnv1a(std::string_view text);

}  // namespace vpaint
