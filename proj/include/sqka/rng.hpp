#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sqka {

// SplitMix64 finalizer. Used to derive independent seeds from a master seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for stream `index` of a master seed. Documented in the README as part of
// the reproducibility contract: stream i of seed s is mix64(s + (i+1)*GAMMA)
// where GAMMA is the SplitMix64 increment.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master + index * 0x9e3779b97f4a7c15ULL);
}

// Deterministic random stream. All draws go through explicit mappings of the
// raw mt19937_64 output, so identical seeds give identical sequences on every
// platform (std::uniform_*_distribution makes no such guarantee).
class Rand {
public:
    explicit Rand(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    int bit() { return static_cast<int>(eng_() >> 63); }

    std::uint64_t below(std::uint64_t n) {  // [0, n), unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    std::string bit_string(std::size_t len) {
        std::string s(len, '0');
        for (auto& c : s) c = bit() ? '1' : '0';
        return s;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    // Sorted k-subset of {0, ..., n-1}.
    std::vector<std::size_t> subset(std::size_t n, std::size_t k) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(all[i], all[i + below(n - i)]);
        }
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace sqka
