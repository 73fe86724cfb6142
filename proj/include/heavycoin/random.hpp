#pragma once

#include <cstdint>
#include <random>

namespace heavycoin {

// splitmix64 finalizer; used to derive independent per-episode seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of the random stream for trial `index` under `master_seed`. Episodes
// seeded this way are reproducible regardless of scheduling or thread count.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

// Deterministic random stream. All draws go through explicit conversions of
// mt19937_64 output words, so identical seeds give identical sequences on
// every platform (std::*_distribution would not guarantee that).
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double prob) { return uniform01() < prob; }

    // Unbiased uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t reject = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= reject) return r % n;
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace heavycoin
