#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "homechain/core/bytes.hpp"

namespace homechain {

// Deterministic RNG wrapper. mt19937_64 plus hand-rolled bounded sampling so
// streams are bit-identical across platforms and standard library versions
// (std::uniform_int_distribution is not portable).
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Unbiased integer in [0, n). Lemire multiply-shift rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        using u128 = unsigned __int128;
        std::uint64_t x = next();
        u128 m = static_cast<u128>(x) * static_cast<u128>(n);
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next();
                m = static_cast<u128>(x) * static_cast<u128>(n);
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // [0,1) with 53 bits of precision.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    Bytes bytes(std::size_t n) {
        Bytes out;
        out.reserve(n);
        while (out.size() < n) {
            std::uint64_t w = next();
            for (int i = 0; i < 8 && out.size() < n; ++i) {
                out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
            }
        }
        return out;
    }

    // Lowercase-hex token of `bits` random bits; bits must be a multiple of 8.
    std::string token(std::size_t bits) { return hex_encode(bytes(bits / 8)); }

    // k distinct indices from [0, n), in selection order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) k = n;
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[bounded(i)]);
        }
    }

    // Independent child stream, stable for a given (seed, label) pair.
    DetRng fork(std::string_view label) const {
        // FNV-1a over the label folded into the parent seed.
        std::uint64_t h = 14695981039346656037ULL;
        for (const char c : label) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 1099511628211ULL;
        }
        return DetRng(seed_ ^ (h | 1ULL));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 eng_;
};

}  // namespace homechain
