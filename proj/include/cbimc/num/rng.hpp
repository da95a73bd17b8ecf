#pragma once

#include <array>
#include <cstdint>

namespace cbimc::num {

// Philox4x32-10 counter-based generator.  A draw is a pure function of
// (key, counter), so every (path, layer, noise-kind) tuple gets its own
// stream and results do not depend on scheduling or thread count.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

enum class NoiseKind : std::uint32_t {
    Diffusion = 0,
    JumpCount = 1,
    JumpSize = 2,
};

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t path, std::uint32_t layer,
                 NoiseKind kind);

    double next_u01();    // uniform on (0, 1)
    double next_normal(); // standard normal via inverse-CDF
    long next_poisson(double mean);

private:
    void refill();
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> prefix_; // stream id; first two words count blocks
    std::uint64_t block_ = 0;
    std::array<double, 2> buf_{};
    int avail_ = 0;
};

} // namespace cbimc::num
