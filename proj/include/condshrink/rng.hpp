#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace condshrink {

/// Per-replicate random stream. Owned by exactly one caller; never shared
/// across threads.
class RngStream {
public:
    using engine_type = std::mt19937_64;

    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    /// Exponential with the given rate.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    std::uint64_t next_u64() { return engine_(); }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed material for replicate `replicate_index` of stream `stream_tag`: a
/// chained hash of the triple, so the mapping depends only on the triple and
/// never on thread count or scheduling.
constexpr std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t replicate_index,
                                       std::uint64_t stream_tag) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ replicate_index);
    h = mix64(h ^ (stream_tag * 0xd1b54a32d192ed03ULL));
    return h;
}

inline RngStream derive_replicate_seed(std::uint64_t master_seed, std::uint64_t replicate_index,
                                       std::uint64_t stream_tag) {
    return RngStream(replicate_seed(master_seed, replicate_index, stream_tag));
}

}  // namespace condshrink
