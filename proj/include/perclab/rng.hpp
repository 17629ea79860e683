// Counter-based random numbers.
//
// Every random quantity in the library is a pure function of a 64-bit key and
// a counter, so any site, walk step or sample can be regenerated on its own
// without replaying a sequential stream. The block cipher is Philox4x32-10.
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "perclab/lattice.hpp"

namespace perclab {

inline constexpr std::string_view kRngAlgorithmId = "philox4x32-10/site-pair-v1";

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

constexpr PhiloxKey philox_key(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Two 64-bit outputs for the counter (c0, c1) under `seed`.
constexpr std::array<std::uint64_t, 2> philox_pair(std::uint64_t seed, std::uint64_t c0,
                                                   std::uint64_t c1) {
    const PhiloxCounter out =
        philox4x32({static_cast<std::uint32_t>(c0), static_cast<std::uint32_t>(c0 >> 32),
                    static_cast<std::uint32_t>(c1), static_cast<std::uint32_t>(c1 >> 32)},
                   philox_key(seed));
    return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
            (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Frozen seed derivation: hash64(base, size, index).
constexpr std::uint64_t hash64(std::uint64_t base, std::uint64_t size, std::uint64_t index) {
    std::uint64_t h = splitmix64(base ^ 0x6A09E667F3BCC908ull);
    h = splitmix64(h ^ size);
    h = splitmix64(h ^ (index * 0x9E3779B97F4A7C15ull));
    return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

/// Sites are open when their 64-bit uniform falls below a threshold.
class OpenThreshold {
public:
    OpenThreshold() = default;
    explicit OpenThreshold(double p);

    constexpr bool open(std::uint64_t u) const { return all_ || u < threshold_; }
    double p() const { return p_; }

private:
    double p_ = 0.5;
    std::uint64_t threshold_ = 0x8000000000000000ull;
    bool all_ = false;
};

/// The uniform attached to lattice site (a, b) under `seed`. Sites are keyed
/// by their absolute lattice position, so every box that contains a site sees
/// the same value. One Philox call covers the horizontal pair (2k, 2k + 1).
constexpr std::uint64_t site_uniform(std::uint64_t seed, TriCoord s) {
    const auto a = static_cast<std::int64_t>(s.a);
    const std::int64_t pair = a >= 0 ? a / 2 : -((-a + 1) / 2);
    const auto lane = static_cast<std::size_t>(a - 2 * pair);
    const auto words = philox_pair(seed, static_cast<std::uint64_t>(pair),
                                   static_cast<std::uint64_t>(static_cast<std::int64_t>(s.b)));
    return words[lane];
}

/// Uniform stream for a (key, stream, step) triple, used by walks and bootstrap.
constexpr std::uint64_t stream_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
    return philox_pair(seed, step, stream)[0];
}

}  // namespace perclab
