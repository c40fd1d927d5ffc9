#pragma once

// Helpers shared by the generator translation units.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace optree::persona::detail {

inline uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms unlike std::hash.
inline uint64_t fnv(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline uint64_t mix(uint64_t seed, uint64_t salt) { return splitmix(seed ^ splitmix(salt)); }
inline uint64_t mix(uint64_t seed, std::string_view salt) { return mix(seed, fnv(salt)); }

class Rng {
public:
    explicit Rng(uint64_t seed) : g_(seed) {}

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g_); }
    double real(double lo = 0, double hi = 1) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
    bool chance(double p) { return p > 0 && real() < p; }
    size_t index(size_t n) { return static_cast<size_t>(uniform(0, static_cast<int>(n) - 1)); }
    int poisson(double mean) { return mean <= 0 ? 0 : std::poisson_distribution<int>(mean)(g_); }

    template <class C>
    const auto& pick(const C& c) {
        return c[index(std::size(c))];
    }
    template <class T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates with our own draws keeps results independent of the library's shuffle.
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }
    /// k distinct elements in pool order of the draw.
    template <class C>
    std::vector<std::string> sample(const C& pool, size_t k) {
        std::vector<std::string> all(std::begin(pool), std::end(pool));
        shuffle(all);
        all.resize(std::min(k, all.size()));
        return all;
    }

private:
    std::mt19937_64 g_;
};

/// Replaces every "{name}" with its value; unknown placeholders stay.
inline std::string fill(std::string_view tpl, const std::vector<std::pair<std::string, std::string>>& slots) {
    std::string out;
    size_t i = 0;
    while (i < tpl.size()) {
        if (tpl[i] == '{') {
            size_t j = tpl.find('}', i);
            if (j != std::string_view::npos) {
                std::string_view name = tpl.substr(i + 1, j - i - 1);
                auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.first == name; });
                if (it != slots.end()) {
                    out += it->second;
                    i = j + 1;
                    continue;
                }
            }
        }
        out += tpl[i++];
    }
    return out;
}

inline std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

/// "A", "A and B", "A, B and C".
inline std::string and_list(const std::vector<std::string>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i > 0) out += i + 1 == xs.size() ? " and " : ", ";
        out += xs[i];
    }
    return out;
}

inline std::string first_name(const std::string& full) { return full.substr(0, full.find(' ')); }

/// Deterministic song title of an artist's k-th track.
std::string song_title(std::string_view artist, int k);
/// Song length in seconds, [150, 330].
int song_seconds(std::string_view artist, std::string_view title);

}  // namespace optree::persona::detail
