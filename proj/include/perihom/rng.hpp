/// @file rng.hpp
/// @brief Philox4x32-10 counter-based generator with per-path streams and a
/// Box-Muller normal source. A stream is fully determined by (seed, stream
/// id), so path results do not depend on thread scheduling.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "perihom/trig_interp.hpp"

namespace perihom {

/// Philox4x32 with 10 rounds (Salmon et al. multipliers and Weyl constants).
class Philox4x32 {
public:
    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr2_(static_cast<std::uint32_t>(stream)),
          ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

    /// Next 4x32 block; the 64-bit block counter advances by one.
    std::array<std::uint32_t, 4> next_block() {
        std::uint32_t x0 = static_cast<std::uint32_t>(block_);
        std::uint32_t x1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t x2 = ctr2_, x3 = ctr3_;
        std::uint32_t k0 = key0_, k1 = key1_;
        ++block_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * x0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * x2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t y0 = hi1 ^ x1 ^ k0;
            const std::uint32_t y1 = lo1;
            const std::uint32_t y2 = hi0 ^ x3 ^ k1;
            const std::uint32_t y3 = lo0;
            x0 = y0;
            x1 = y1;
            x2 = y2;
            x3 = y3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {x0, x1, x2, x3};
    }

    /// Two uniforms in (0, 1] per block (53-bit mantissas).
    void next_uniforms(double& u0, double& u1) {
        const auto b = next_block();
        const std::uint64_t w0 =
            (static_cast<std::uint64_t>(b[0]) << 32 | b[1]) >> 11;
        const std::uint64_t w1 =
            (static_cast<std::uint64_t>(b[2]) << 32 | b[3]) >> 11;
        u0 = (static_cast<double>(w0) + 1.0) * 0x1.0p-53;
        u1 = (static_cast<double>(w1) + 1.0) * 0x1.0p-53;
    }

private:
    static constexpr std::uint32_t kMult0 = 0xD2511F53u;
    static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;  // stream id occupies the upper counter words
    std::uint64_t block_ = 0;    // draw counter in the lower words
};

/// Standard normals by Box-Muller on Philox uniforms; the trig factor uses
/// the table-based sincos for speed.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : gen_(seed, stream) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u0, u1;
        gen_.next_uniforms(u0, u1);
        const double r = std::sqrt(-2.0 * std::log(u0));
        double c, s;
        fastmath::sincos_turn(u1, c, s);
        spare_ = r * s;
        have_spare_ = true;
        return r * c;
    }

private:
    Philox4x32 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace perihom
