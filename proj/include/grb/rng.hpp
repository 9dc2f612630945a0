// Counter-based RNG (Philox4x32-10). A generator is keyed by (seed, stream);
// the draw sequence is a pure function of the key and a 64-bit counter, so
// per-path substreams are reproducible independent of scheduling.
#pragma once

#include <cmath>
#include <cstdint>

#include "grb/linalg.hpp"

namespace grb {

namespace detail {
inline void mulhilo32(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}
}  // namespace detail

class Rng {
  public:
    Rng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    uint32_t next_u32() {
        if (have_ == 0) refill();
        return block_[--have_];
    }

    uint64_t next_u64() {
        const uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform in (0,1)
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return spare_normal_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_normal_ = r * std::sin(a);
        have_normal_ = true;
        return r * std::cos(a);
    }

    // uniform direction on S^2
    Vec3 unit_vector3() {
        const double c = uniform(-1.0, 1.0);
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        const double a = uniform(0.0, 2.0 * M_PI);
        return {s * std::cos(a), s * std::sin(a), c};
    }

  private:
    void refill() {
        uint32_t c0 = static_cast<uint32_t>(counter_);
        uint32_t c1 = static_cast<uint32_t>(counter_ >> 32);
        uint32_t c2 = static_cast<uint32_t>(stream_);
        uint32_t c3 = static_cast<uint32_t>(stream_ >> 32);
        uint32_t k0 = static_cast<uint32_t>(seed_);
        uint32_t k1 = static_cast<uint32_t>(seed_ >> 32);
        ++counter_;

        for (int round = 0; round < 10; ++round) {
            uint32_t hi0, lo0, hi1, lo1;
            detail::mulhilo32(0xD2511F53u, c0, hi0, lo0);
            detail::mulhilo32(0xCD9E8D57u, c2, hi1, lo1);
            const uint32_t n0 = hi1 ^ c1 ^ k0;
            const uint32_t n1 = lo1;
            const uint32_t n2 = hi0 ^ c3 ^ k1;
            const uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_[0] = c0;
        block_[1] = c1;
        block_[2] = c2;
        block_[3] = c3;
        have_ = 4;
    }

    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    uint32_t block_[4] = {};
    int have_ = 0;
    bool have_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace grb
