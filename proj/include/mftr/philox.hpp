#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC 2011) plus a per-sample substream view.
// Each Monte Carlo sample owns the stream keyed by (seed, scenario hash,
// sample index), so serial and parallel runs produce identical draws no
// matter how samples are partitioned across workers.

#include <array>
#include <cmath>
#include <cstdint>

namespace mftr {

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr,
                                             std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
        const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
        ctr = {static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<uint32_t>(p1),
               static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<uint32_t>(p0)};
    }
    return ctr;
}

// SplitMix64 finalizer, used to mix scenario parameters into a stream key.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

// One sample's substream: counter = (sample index, stream tag, block index).
class SampleStream {
  public:
    SampleStream(uint64_t seed, uint32_t stream_tag, uint64_t sample_index)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          ctr_{static_cast<uint32_t>(sample_index),
               static_cast<uint32_t>(sample_index >> 32), stream_tag, 0u} {}

    uint32_t next_u32() {
        if (pos_ == 4) {
            ++ctr_[3];  // next block within this sample's stream
            buf_ = detail::philox4x32_10(ctr_, key_);
            pos_ = 0;
        } else if (pos_ == -1) {
            buf_ = detail::philox4x32_10(ctr_, key_);
            pos_ = 0;
        }
        return buf_[static_cast<std::size_t>(pos_++)];
    }

    // 53-bit uniform, strictly inside (0, 1)
    double next_unit() {
        const uint64_t hi = next_u32();
        const uint64_t lo = next_u32();
        const uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; the paired draw is cached
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

  private:
    std::array<uint32_t, 2> key_;
    std::array<uint32_t, 4> ctr_;
    std::array<uint32_t, 4> buf_{};
    int pos_ = -1;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Gamma(shape, 1) by Marsaglia & Tsang (2000); the shape < 1 boost uses
// Gamma(shape+1) * U^{1/shape}.
inline double sample_gamma(SampleStream& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.next_unit();
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.next_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_unit();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

// Noncentral chi-square with even dof = 2*mu and noncentrality lambda:
// (Z + sqrt(lambda))^2 + 2 Gamma(mu - 1/2).
inline double sample_noncentral_chi2(SampleStream& rng, int two_mu, double lambda) {
    const double z = rng.next_normal() + std::sqrt(lambda);
    double out = z * z;
    if (two_mu > 1) out += 2.0 * sample_gamma(rng, 0.5 * (two_mu - 1));
    return out;
}

}  // namespace mftr
