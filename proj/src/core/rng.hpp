#pragma once

#include <cmath>
#include <cstdint>

// Counter-style uniform stream: every (seed, stream) pair owns an independent
// splitmix64 sequence, so paths can be generated in any order / on any thread
// with bit-identical results.  Normals come from the AS241 inverse CDF, which
// is fully specified by its coefficients (no libm distribution involved).

namespace rsgbm {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27; z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t derive_stream(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(tag * 0x9E3779B97F4A7C15ull + mix64(a + 0x632BE59BD9B4E019ull * b));
}

// inverse standard normal CDF, Wichura's algorithm AS241 (double precision)
double inverse_normal_cdf(double p);

class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix64(seed + 0x9E3779B97F4A7C15ull) ^ mix64(stream + 0xD1B54A32D192ED03ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix64(state_);
    }

    // uniform on (0,1), strictly interior
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return inverse_normal_cdf(uniform()); }

    double exponential() { return -std::log(uniform()); }

    int poisson(double mean) {
        // inversion for small means; larger means split exactly into
        // independent Poisson(15) blocks to keep exp(-mean) representable
        int total = 0;
        while (mean > 30.0) {
            total += poisson_inversion(15.0);
            mean -= 15.0;
        }
        return total + poisson_inversion(mean);
    }

private:
    int poisson_inversion(double mean) {
        if (mean <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-mean);
        double cum = p;
        int k = 0;
        while (u > cum && k < 1000) {
            ++k;
            p *= mean / k;
            cum += p;
        }
        return k;
    }

    std::uint64_t state_;
};

}  // namespace rsgbm
