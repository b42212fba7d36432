#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace topogen {

// Deterministic, platform-independent PRNG (splitmix64). Every stochastic
// component takes one of these rather than touching global state, so a run
// is reproducible bit-for-bit from a single root seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). n must be positive.
    uint64_t next_below(uint64_t n) {
        // modulo bias is negligible for the small n used here
        return next_u64() % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// FNV-1a, used for text hashing (feature buckets, registry fingerprints,
// mock-backend digests).
inline uint64_t fnv1a64(std::string_view text, uint64_t seed = 0xCBF29CE484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derives a child seed from a root seed and a component label. All
// randomness in the pipeline funnels through the root seed via these labels.
inline uint64_t seed_for(uint64_t root, std::string_view label) {
    Rng r(root ^ fnv1a64(label));
    return r.next_u64();
}

}  // namespace topogen
