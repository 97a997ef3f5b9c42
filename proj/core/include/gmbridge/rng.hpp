#pragma once

#include <cstdint>
#include <random>

namespace gmb {

// splitmix64 finalizer, used to decorrelate per-path seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent engine for path `index` of a run keyed by `seed`. Streams are
// implementation defined but reproducible for a given build, and do not
// depend on how many other paths are drawn or in which order.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(mix64(seed ^ mix64(index + 1)));
}

} // namespace gmb
