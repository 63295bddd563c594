#pragma once

#include <cstdint>

namespace topomet {

// splitmix64 finalizer
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic per-task stream derivation from a base seed and a task
// index, so parallel or reordered task execution cannot change results.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x51ed2701ab5bd23fULL));
}

// Top 53 bits of a 64-bit word as a uniform double in [0, 1). Fixed mapping
// so sampled records are reproducible across standard library versions.
inline double uniform01_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace topomet
