#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace micon::math {

// Counter-based generator built on the splitmix64 finalizer. Every stream is
// a pure function of (key, counter), so independent streams can be derived
// from a single 64-bit seed without sharing state. Splitting never advances
// the parent.
class SplitRng {
public:
    explicit SplitRng(uint64_t seed) : key_(mix(seed, 0x6d69636f6e2d7267ULL)) {}

    // Derived stream; deterministic in (parent key, stream id).
    SplitRng split(uint64_t stream) const {
        SplitRng r(0);
        r.key_ = mix(key_, stream ^ 0x53504c4954ULL);
        r.ctr_ = 0;
        return r;
    }
    SplitRng split(std::string_view label) const { return split(fnv64(label)); }

    uint64_t next_u64() { return mix(key_, ++ctr_); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; caches the spare draw.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Unbiased integer in [0, n) by rejection.
    size_t below(size_t n) {
        if (n <= 1) return 0;
        const uint64_t span = static_cast<uint64_t>(n);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<size_t>(x % span);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            using std::swap;
            swap(v[i - 1], v[below(i)]);
        }
    }

    static uint64_t fnv64(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    static uint64_t mix(uint64_t key, uint64_t i) {
        uint64_t z = key + i * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t key_ = 0;
    uint64_t ctr_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace micon::math
