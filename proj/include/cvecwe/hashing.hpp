// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvecwe {

// 64-bit FNV-1a over raw bytes. Stable across platforms and runs, unlike
// std::hash.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept {
    std::uint64_t h = basis;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// keyed_hash(seed, key) = splitmix64(fnv1a64(key) XOR splitmix64(seed)).
// Split membership depends only on this value, never on input order.
constexpr std::uint64_t keyed_hash(std::uint64_t seed, std::string_view key) noexcept {
    return splitmix64(fnv1a64(key) ^ splitmix64(seed));
}

// Top 53 bits mapped to [0, 1).
constexpr double hash_to_unit(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Deterministic generator whose output sequence is fully specified here, so
// shuffles and samples are identical across standard libraries.
class SplitMixRng {
public:
    explicit SplitMixRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % bound;
    }

    double unit() noexcept { return hash_to_unit(next()); }

private:
    std::uint64_t state_;
};

// Fisher-Yates from the back: for i = n-1 .. 1 swap(i, below(i+1)).
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMixRng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace cvecwe
