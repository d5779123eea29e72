#ifndef M12_RNG_HPP
#define M12_RNG_HPP

#include <cstdint>
#include <random>

namespace m12 {

// splitmix64 finalizer; used to derive well-separated child seeds from a
// master seed plus stream identifiers.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based seed derivation: child = mix(mix(master) ^ mix(a) ^ mix(b)).
// Grid points and schemes get independent, individually reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(master) ^ mix64(a + 0x1234567) ^ mix64(b + 0x89abcdef));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace m12

#endif
