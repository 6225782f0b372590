#pragma once

#include <array>
#include <cstdint>

namespace fraclab {

/// Counter-based RNG keyed by (seed, site index, stream). Every draw is a pure
/// function of its key, so a lattice shift acts on the index argument and
/// stationarity identities hold exactly rather than statistically.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

/// Raw 64-bit word for lattice site (i, j, k) under `seed` on stream `stream`.
inline std::uint64_t site_word(std::uint64_t seed, std::int64_t i, std::int64_t j,
                               std::int64_t k = 0, std::uint64_t stream = 0) {
    std::uint64_t h = splitmix64(seed ^ 0x5bf03635f0935e2dULL);
    h = mix(h, static_cast<std::uint64_t>(i));
    h = mix(h, static_cast<std::uint64_t>(j));
    h = mix(h, static_cast<std::uint64_t>(k));
    h = mix(h, stream);
    return h;
}

/// Uniform double in [0, 1) from a 64-bit word (53 mantissa bits).
inline double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

inline double site_unit(std::uint64_t seed, std::int64_t i, std::int64_t j,
                        std::int64_t k = 0, std::uint64_t stream = 0) {
    return to_unit(site_word(seed, i, j, k, stream));
}

/// Sequential generator for non-site draws (test fields, probe sampling).
class Sequence {
public:
    explicit Sequence(std::uint64_t seed) : state_(splitmix64(seed ^ 0xd1b54a32d192ed03ULL)) {}
    std::uint64_t next_word() {
        state_ = splitmix64(state_);
        return state_;
    }
    double next_unit() { return to_unit(next_word()); }
    /// Uniform in [a, b).
    double next_in(double a, double b) { return a + (b - a) * next_unit(); }

private:
    std::uint64_t state_;
};

}  // namespace rng
}  // namespace fraclab
