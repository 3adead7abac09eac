#pragma once

#include <cstdint>
#include <vector>

namespace csh {

using Bytes = std::vector<std::uint8_t>;

/// splitmix64: tiny deterministic generator, identical on every platform.
/// Used for synthetic data and the randomized-matching test mode.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Unbiased value in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t v = next();
            if (v >= threshold) return v % bound;
        }
    }

    void fill(Bytes& out, std::size_t n) {
        out.clear();
        out.reserve(n);
        while (out.size() < n) {
            std::uint64_t v = next();
            for (int i = 0; i < 8 && out.size() < n; ++i) {
                out.push_back(static_cast<std::uint8_t>(v & 0xff));
                v >>= 8;
            }
        }
    }
};

inline void put_u64_le(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64_le(const Bytes& in, std::size_t at = 0) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(in[at + i]) << (8 * i);
    return v;
}

}  // namespace csh
