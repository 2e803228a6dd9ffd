#pragma once
// rng.hpp - deterministic pseudo-random streams.
//
// Everything downstream (level generation, dataset policies, exemplar
// selection) must reproduce bit-identically across platforms and standard
// library versions. std::uniform_int_distribution and std::shuffle are
// implementation-defined, so bounded draws and shuffles are done by hand on
// top of two reference generators: splitmix64 for seeding and stream
// derivation, xoshiro256++ for the stream itself.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace textgrid {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// FNV-1a, used for tagging streams by purpose string and for the
// non-cryptographic file/prompt fingerprints in the eval harness.
inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 14695981039346656037ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class Rng {
public:
    // Streams are derived from (tag, seed, salt). The tag names the purpose
    // ("level/GoTo", "predict-prefix", ...), the seed is the user-visible
    // instance seed, the salt separates retry attempts and sub-streams.
    static Rng from(std::string_view tag, std::uint64_t seed, std::uint64_t salt = 0) {
        std::uint64_t m = fnv1a64(tag);
        std::uint64_t s = m;
        (void)splitmix64(s);
        s ^= seed + kGolden;
        (void)splitmix64(s);
        s ^= salt + kGolden * 3;
        Rng r;
        for (auto& w : r.s_) w = splitmix64(s);
        return r;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform integer in [0, n). Rejection sampling keeps the draw unbiased
    // without touching implementation-defined library distributions.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    int range(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // True with probability num/den.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    double unit() {  // [0,1) with 53-bit resolution
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates, fixed order
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(v.size()))];
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_{1, 2, 3, 4};
};

}  // namespace textgrid
