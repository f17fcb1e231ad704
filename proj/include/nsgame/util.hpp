#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsg {

// Player subsets are bitmasks over players 0..k-1 (bit i = player i).
using Mask = std::uint32_t;

inline int popcount(Mask m) { return std::popcount(m); }

inline bool subset_of(Mask s, Mask t) { return (s & ~t) == 0; }

// Members of a mask in ascending player order.
inline std::vector<int> mask_members(Mask m, int k) {
    std::vector<int> out;
    for (int i = 0; i < k; ++i)
        if (m & (Mask(1) << i)) out.push_back(i);
    return out;
}

// Human-readable subset, players printed 1-based: "{1,3}".
inline std::string mask_to_string(Mask m, int k) {
    std::string s = "{";
    bool first = true;
    for (int i = 0; i < k; ++i) {
        if (m & (Mask(1) << i)) {
            if (!first) s += ",";
            s += std::to_string(i + 1);
            first = false;
        }
    }
    return s + "}";
}

// Mixed-radix index space over a tuple of finite coordinates.  The first
// coordinate is the most significant digit, so flat indices enumerate tuples
// in lexicographic order with the leftmost coordinate outermost.
struct FlatSpace {
    std::vector<int> radix;
    std::vector<long long> stride;
    long long count = 1;

    FlatSpace() = default;
    explicit FlatSpace(std::vector<int> r) : radix(std::move(r)) {
        stride.assign(radix.size(), 1);
        for (int i = int(radix.size()) - 2; i >= 0; --i)
            stride[i] = stride[i + 1] * radix[i + 1];
        count = radix.empty() ? 1 : stride[0] * radix[0];
    }

    int dims() const { return int(radix.size()); }

    long long index(const std::vector<int>& t) const {
        long long ix = 0;
        for (size_t i = 0; i < radix.size(); ++i) ix += t[i] * stride[i];
        return ix;
    }

    std::vector<int> decode(long long ix) const {
        std::vector<int> t(radix.size());
        for (size_t i = 0; i < radix.size(); ++i) {
            t[i] = int(ix / stride[i]);
            ix %= stride[i];
        }
        return t;
    }

    int digit(long long ix, int i) const { return int((ix / stride[i]) % radix[i]); }
};

// SplitMix64: the documented splittable generator every piece of randomness
// in this project flows through.  Child streams are derived by mixing a
// label into the parent seed, so fixtures regenerate identically from one
// 64-bit root seed.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 bits of precision; bit-identical across
    // platforms since it avoids libstdc++'s distribution objects.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Deterministic child stream for a labeled sub-task.
    SplitMix64 split(std::uint64_t label) {
        SplitMix64 tmp(state ^ (0x5851f42d4c957f2dULL * (label + 1)));
        return SplitMix64(tmp.next_u64());
    }

    double exponential() {
        double u;
        do { u = next_double(); } while (u <= 0.0);
        return -std::log(u);
    }
};

}  // namespace nsg
