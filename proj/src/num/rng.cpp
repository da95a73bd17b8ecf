#include "cbimc/num/rng.hpp"
#include "cbimc/num/special.hpp"
#include "cbimc/errors.hpp"

#include <cmath>

namespace cbimc::num {

namespace {

inline void mul_hilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                     std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mul_hilo(M0, ctr[0], hi0, lo0);
        mul_hilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t path,
                           std::uint32_t layer, NoiseKind kind) {
    key_ = {static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32)};
    prefix_ = {0u, 0u,
               static_cast<std::uint32_t>(path ^ (path >> 32) * 0x9E3779B9u),
               (layer << 8) | static_cast<std::uint32_t>(kind)};
    // keep the full 64-bit path id: fold high bits into the layer word too
    prefix_[3] ^= static_cast<std::uint32_t>(path >> 32) << 16;
}

void RandomStream::refill() {
    std::array<std::uint32_t, 4> ctr = prefix_;
    ctr[0] = static_cast<std::uint32_t>(block_);
    ctr[1] = static_cast<std::uint32_t>(block_ >> 32);
    ++block_;
    auto r = philox4x32(ctr, key_);
    auto to_u01 = [](std::uint32_t hi, std::uint32_t lo) {
        std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return (bits >> 11) * 0x1.0p-53 + 0x1.0p-54; // strictly inside (0,1)
    };
    buf_[0] = to_u01(r[0], r[1]);
    buf_[1] = to_u01(r[2], r[3]);
    avail_ = 2;
}

double RandomStream::next_u01() {
    if (avail_ == 0) refill();
    return buf_[2 - avail_--];
}

double RandomStream::next_normal() { return inv_normal_cdf(next_u01()); }

long RandomStream::next_poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw ValidationError("next_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Knuth product method
        double limit = std::exp(-mean), prod = next_u01();
        long k = 0;
        while (prod > limit) {
            prod *= next_u01();
            ++k;
        }
        return k;
    }
    // Hoermann's PTRS transformed rejection for large means.
    const double slam = std::sqrt(mean), llam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = next_u01() - 0.5;
        double v = next_u01();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * llam - mean - std::lgamma(kf + 1.0))
            return static_cast<long>(kf);
    }
}

} // namespace cbimc::num
