#pragma once

#include <array>
#include <cstdint>

namespace wgflow {

/// Philox4x32-10 counter-based generator: a keyed bijection on 128-bit
/// counters. Output depends only on (key, counter), so any particle or
/// sample can draw its numbers without touching a shared state.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Deterministic variates addressed by (seed, stream, index).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

    /// Two uniforms in (0, 1) for the given index.
    std::array<double, 2> uniform_pair(std::uint64_t index) const noexcept;

    /// Two independent standard normals for the given index (Box-Muller).
    std::array<double, 2> normal_pair(std::uint64_t index) const noexcept;

    /// k-th standard normal of this stream (pairs are split by parity).
    double normal(std::uint64_t k) const noexcept { return normal_pair(k / 2)[k % 2]; }
    double uniform(std::uint64_t k) const noexcept { return uniform_pair(k / 2)[k % 2]; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace wgflow
