#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include "core/rng.hpp"

using namespace rsgbm;

TEST_CASE("inverse normal cdf matches boost across the unit interval") {
    const boost::math::normal dist;
    for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0 - 1e-6}) {
        const double mine = inverse_normal_cdf(p);
        const double ref = boost::math::quantile(dist, p);
        CHECK(mine == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(inverse_normal_cdf(0.5) == 0.0);
}

TEST_CASE("streams are reproducible and distinct") {
    PathRng a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 16; ++i) {
        const std::uint64_t x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
}

TEST_CASE("uniforms are strictly inside (0,1)") {
    PathRng rng(1, 1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("poisson sampling has the right first two moments") {
    for (double mean : {0.5, 5.7, 47.0}) {
        PathRng rng(3, static_cast<std::uint64_t>(mean * 100));
        const int n = 200000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = rng.poisson(mean);
            sum += k;
            sum_sq += k * k;
        }
        const double m = sum / n;
        const double var = sum_sq / n - m * m;
        const double se_mean = std::sqrt(mean / n);
        CHECK(std::abs(m - mean) < 4.0 * se_mean);
        CHECK(std::abs(var - mean) < 0.03 * mean + 6.0 * se_mean);
    }
}

TEST_CASE("normals have unit variance and symmetry") {
    PathRng rng(9, 0);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}
