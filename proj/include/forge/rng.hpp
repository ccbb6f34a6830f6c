#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace forge {

// SplitMix64 finalizer; the mixing step of every stream below.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
    return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t hash_string(std::string_view s) noexcept {
    // FNV-1a, then mixed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

/// Counter-based random stream.
///
/// The n-th draw is a pure function of (key, n), so a stream can be
/// re-created anywhere from its key alone. Child streams are derived by
/// hashing tags into the key; this is how per-example and per-pixel streams
/// stay independent of scheduling order. Draws are mapped to reals and
/// integers without the standard distributions, whose output differs
/// between standard library implementations.
class Rng {
public:
    explicit constexpr Rng(std::uint64_t key = 0) noexcept : key_(key) {}

    constexpr std::uint64_t key() const noexcept { return key_; }

    constexpr std::uint64_t next_u64() noexcept {
        return mix64(key_ ^ mix64(counter_++));
    }

    /// Uniform in [0, 1).
    constexpr double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n). n must be > 0.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        // Rejection on the top of the range removes modulo bias.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    /// Child stream keyed by this stream's key and the given tags.
    /// Does not advance this stream.
    constexpr Rng derive(std::initializer_list<std::uint64_t> tags) const noexcept {
        std::uint64_t k = key_;
        for (auto t : tags) k = hash_combine(k, t);
        return Rng(k);
    }

    constexpr Rng derive(std::string_view tag) const noexcept {
        return Rng(hash_combine(key_, hash_string(tag)));
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace forge
