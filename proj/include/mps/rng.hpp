#pragma once

#include <cstdint>

namespace mps {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Deterministic, platform-independent PRNG (splitmix64 stream).
/// Streams form a derivation tree: derive(key) yields an independent
/// child stream, so the whole simulation is a pure function of one
/// master seed.
class SeededRng {
public:
    SeededRng() = default;
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    /// Uniform value in [0, m) by rejection sampling. m must be > 0.
    std::uint64_t below(std::uint64_t m) {
        // largest multiple of m that fits in 64 bits
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % m);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % m;
    }

    bool coin() { return next_u64() & 1u; }

    /// Child stream keyed by `key`; independent of further draws here.
    SeededRng derive(std::uint64_t key) const {
        std::uint64_t s = state_ ^ (0xd6e8feb86659fd93ULL * (key + 1));
        detail::splitmix64(s);
        return SeededRng(s);
    }

private:
    std::uint64_t state_ = 0;
};

} // namespace mps
