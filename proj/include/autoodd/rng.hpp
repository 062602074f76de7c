// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace autoodd {

/// Deterministic 64-bit random stream (splitmix64). Used instead of the
/// standard distributions so that traces are byte-identical across
/// platforms and standard-library versions.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Unbiased via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) {
            return 0;
        }
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

private:
    std::uint64_t state_;
};

/// FNV-1a over a byte string; also used for config digests.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x00000100000001b3ull;
    }
    return h;
}

/// Derives an independent child stream from one root seed. Each named
/// component of the audit (override draw, random agent, ...) gets its own
/// stream so ablations do not perturb each other's randomness.
inline RngStream named_stream(std::uint64_t root_seed, std::string_view name) {
    std::uint64_t z = root_seed ^ fnv1a64(name);
    // one splitmix round to decorrelate nearby seeds
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return RngStream(z ^ (z >> 31));
}

} // namespace autoodd
