#pragma once

#include <cstdint>
#include <random>

namespace mvb {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent generator for a (seed, stream) pair. Parallel work items index
// their own stream, so results do not depend on thread scheduling.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(mix64(mix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 1)));
}

}  // namespace mvb
