// Splittable seeding: every (seed, stream-id...) tuple maps to an independent
// generator, so parallel sampling is reproducible regardless of scheduling.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pqk {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a child seed from a base seed and a list of stream indices.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = splitmix64(seed);
    for (auto id : ids) s = splitmix64(s ^ splitmix64(id));
    return s;
}

// Named stream: an mt19937_64 whose state is a pure function of
// (seed, ids...). Used for per-sample / per-site draws.
inline std::mt19937_64 make_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> ids) {
    return std::mt19937_64(derive_seed(seed, ids));
}

}  // namespace pqk
