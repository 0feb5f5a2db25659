#pragma once

#include <cstdint>
#include <random>

namespace edgeprop {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t combine_keys(std::uint64_t acc) { return acc; }

template <typename... Rest>
std::uint64_t combine_keys(std::uint64_t acc, std::uint64_t next, Rest... rest) {
    return combine_keys(mix64(acc ^ mix64(next)), rest...);
}

// Counter-based stream derivation: every (seed, epoch, batch, layer, node, ...)
// tuple gets an independently reproducible generator.
template <typename... Keys>
std::mt19937_64 keyed_rng(std::uint64_t seed, Keys... keys) {
    return std::mt19937_64(combine_keys(mix64(seed), static_cast<std::uint64_t>(keys)...));
}

}  // namespace edgeprop
