#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace flowpick {

/// 64-bit FNV-1a. Stable across platforms; used for content ids and seeding.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) noexcept {
    return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_strings(std::initializer_list<std::string_view> parts,
                                  std::uint64_t seed = 0) noexcept {
    std::uint64_t h = splitmix64(seed);
    for (auto p : parts) h = hash_combine(h, fnv1a(p));
    return h;
}

/// Counter-based generator: draw i of stream `key` is splitmix64(key + i).
/// Draw sequences depend only on the key, never on iteration order elsewhere.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next() noexcept { return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next());
        return lo + static_cast<std::int64_t>(next() % span);
    }

    std::size_t index(std::size_t n) noexcept { return static_cast<std::size_t>(next() % n); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace flowpick
