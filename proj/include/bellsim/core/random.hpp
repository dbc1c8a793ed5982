#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so results do not depend on call order or thread layout.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace bellsim::rng {

/// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

/// SplitMix64 finalizer; used to derive independent keys from a parent key.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t tag) noexcept {
    return splitmix64(parent ^ splitmix64(tag + 0x632BE59BD9B4E019ull));
}

/// Map 52 random bits to the open interval (0, 1); the extremes are 2^-53 and 1 - 2^-53.
constexpr double bits_to_open01(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// A keyed stream addressed by a pair of 64-bit counters.
class CounterStream {
public:
    constexpr CounterStream() = default;
    constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t key() const noexcept { return key_; }

    std::array<std::uint32_t, 4> block(std::uint64_t a, std::uint64_t b) const noexcept {
        return philox4x32({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                           static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                          {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    }

    std::uint64_t bits(std::uint64_t a, std::uint64_t b) const noexcept {
        const auto w = block(a, b);
        return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    }

    double uniform(std::uint64_t a, std::uint64_t b) const noexcept { return bits_to_open01(bits(a, b)); }

    /// Standard normal via Box-Muller on one Philox block.
    double gaussian(std::uint64_t a, std::uint64_t b) const noexcept {
        const auto w = block(a, b);
        const double u1 = bits_to_open01((static_cast<std::uint64_t>(w[0]) << 32) | w[1]);
        const double u2 = bits_to_open01((static_cast<std::uint64_t>(w[2]) << 32) | w[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_ = 0;
};

}  // namespace bellsim::rng
