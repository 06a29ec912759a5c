#pragma once

#include <cmath>
#include <cstdint>

#include "hbasket/math.hpp"

namespace hbasket {

// Counter-based RNG (Philox4x32-10). Each (seed, stream, index) triple owns an
// independent substream addressed purely by counters, so path i draws the same
// numbers no matter how work is batched across threads.
class Philox {
public:
    Philox(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr2_(static_cast<std::uint32_t>(index)),
          ctr3_(static_cast<std::uint32_t>((index >> 32) ^ (stream << 8) ^ stream)) {}

    std::uint64_t next_u64() {
        if (have_ == 0) refill();
        --have_;
        std::uint64_t v = buf_[1 - have_];
        return v;
    }

    // Uniform in the open interval (0, 1).
    double next_double() {
        std::uint64_t x = next_u64();
        double u = (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
        return antithetic_ ? 1.0 - u : u;
    }

    double next_normal() { return inv_norm_cdf(next_double()); }

    // Poisson by CDF inversion; exact and uses one uniform per draw.
    int next_poisson(double mean) {
        if (mean <= 0.0) return 0;
        double u = next_double();
        double p = std::exp(-mean);
        double cdf = p;
        int k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    void set_antithetic(bool on) { antithetic_ = on; }

private:
    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = ctr2_, c3 = ctr3_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = 0xD2511F53ULL * c0;
            std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            std::uint32_t n0 = hi1 ^ c1 ^ k0;
            std::uint32_t n1 = lo1;
            std::uint32_t n2 = hi0 ^ c3 ^ k1;
            std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9U;
            k1 += 0xBB67AE85U;
        }
        buf_[0] = (static_cast<std::uint64_t>(c1) << 32) | c0;
        buf_[1] = (static_cast<std::uint64_t>(c3) << 32) | c2;
        have_ = 2;
        ++block_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;
    std::uint64_t block_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int have_ = 0;
    bool antithetic_ = false;
};

// splitmix64; used to derive child seeds, e.g. for the nested repricing
// Monte Carlo inside the hedging simulator.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace hbasket
