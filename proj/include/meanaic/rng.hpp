#pragma once

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>
#include <initializer_list>

namespace meanaic {

using Engine = boost::random::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Hashes a key tuple such as (base_seed, replicate, cluster) into a seed.
/// Each key gets an independent stream, so draws never depend on the order in
/// which workers visit replicates or clusters.
constexpr std::uint64_t stream_seed(std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (auto k : key) h = mix64(h ^ mix64(k));
    return h;
}

inline Engine make_stream(std::initializer_list<std::uint64_t> key) { return Engine(stream_seed(key)); }

}  // namespace meanaic
