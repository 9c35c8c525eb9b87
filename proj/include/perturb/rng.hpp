#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace perturb {

/// Philox4x32-10 block function (Salmon et al., SC'11).  Pure: maps a 128-bit
/// counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based stream.  The key is the user seed; the upper half of the
/// counter carries the stream id and the lower half counts blocks, so
/// (seed, stream) pairs reproduce identical draws and distinct stream ids
/// never overlap.  Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform double in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Independent child stream; children of distinct (parent, tag) pairs are
    /// distinct streams.
    RngStream split(std::uint64_t tag) const;

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// SplitMix64 finalizer; used to derive stream ids from structured tags.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace perturb
