#pragma once

#include <cmath>
#include <cstdint>

#include "ccim/types.hpp"

namespace ccim {

namespace detail {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based word: f(seed, stream, index). Draws are a pure function of
// the triple, so spins can be evaluated in any order.
inline std::uint64_t noise_word(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t base = mix64(seed + 0x9e3779b97f4a7c15ULL * stream);
    return mix64(base + 0x9e3779b97f4a7c15ULL * index);
}

// uniform in (0,1]
inline double uniform_from_word(std::uint64_t w) {
    return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic sub-seed for derived runs (seed sweeps, outer iterations).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return detail::noise_word(seed, 0xccull, tag);
}

/// One standard-normal draw at (seed, stream, index) via Box-Muller on two
/// counter-hashed uniforms. The transform is fixed: trajectories are pinned
/// by seed in tests.
inline double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const double u1 = detail::uniform_from_word(detail::noise_word(seed, stream, 2 * index));
    const double u2 = detail::uniform_from_word(detail::noise_word(seed, stream, 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Value-like stream view; each (seed, stream_id) pair owns its own draw
/// sequence and never shares words with another stream.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

    double normal() { return normal_at(seed_, stream_, counter_++); }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace ccim
