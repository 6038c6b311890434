#include <doctest.h>

#include "core/expm.hpp"
#include "core/simulate.hpp"
#include "test_util.hpp"

using namespace rsgbm;
using namespace testutil;

TEST_CASE("single-state chain never leaves state 1") {
    const AuxEngine aux(make_single());
    RegimePathSampler sampler(aux, Measure::forward, 1.0);
    RegimePath path;
    for (int p = 0; p < 50; ++p) {
        PathRng rng(5, p);
        sampler.sample(0, rng, path);
        for (int s : path.states) CHECK(s == 0);
    }
}

TEST_CASE("path structure invariants") {
    const AuxEngine aux(make_shen());
    RegimePathSampler sampler(aux, Measure::forward, 1.0);
    RegimePath path;
    for (int p = 0; p < 200; ++p) {
        PathRng rng(6, p);
        sampler.sample(1, rng, path);
        CHECK(path.initial_state == 1);
        CHECK(path.states.front() == 1);
        CHECK(path.states.size() == path.times.size() + 1);
        double prev = 0.0;
        for (double t : path.times) {
            CHECK(t > prev);
            CHECK(t < 1.0);
            prev = t;
        }
    }
}

TEST_CASE("homogeneous terminal distribution matches the matrix exponential") {
    const RegimeModel m = make_shen();
    const AuxEngine aux(m);
    const double t = 1.0;
    RegimePathSampler sampler(aux, Measure::physical, t);
    const Eigen::MatrixXd p = expm((t * m.generator).eval());
    const int n = 100000;
    int count1 = 0;
    RegimePath path;
    for (int k = 0; k < n; ++k) {
        PathRng rng(77, derive_stream(1, k));
        sampler.sample(0, rng, path);
        if (path.terminal_state() == 0) ++count1;
    }
    const double phat = static_cast<double>(count1) / n;
    const double se = std::sqrt(p(0, 0) * (1.0 - p(0, 0)) / n);
    CHECK(std::abs(phat - p(0, 0)) < 3.0 * se);
}

TEST_CASE("the terminal law is invariant to the dominating rate") {
    const AuxEngine aux(make_shen());
    const double t = 1.0;
    RegimePathSampler base(aux, Measure::forward, t);
    RegimePathSampler doubled(aux, Measure::forward, t);
    doubled.override_bound(2.0 * base.bound().lambda);
    const int n = 100000;
    int c_base[2] = {0, 0}, c_dbl[2] = {0, 0};
    RegimePath path;
    for (int k = 0; k < n; ++k) {
        PathRng r1(91, derive_stream(2, k));
        base.sample(0, r1, path);
        ++c_base[path.terminal_state()];
        PathRng r2(92, derive_stream(3, k));
        doubled.sample(0, r2, path);
        ++c_dbl[path.terminal_state()];
    }
    // two-sample homogeneity chi-square, df = 1
    double stat = 0.0;
    for (int s = 0; s < 2; ++s) {
        const double tot = c_base[s] + c_dbl[s];
        const double e = tot / 2.0;
        stat += (c_base[s] - e) * (c_base[s] - e) / e + (c_dbl[s] - e) * (c_dbl[s] - e) / e;
    }
    CHECK(stat < chi2_crit_1pct(1));
}

TEST_CASE("a lying bound is caught at run time") {
    const AuxEngine aux(make_shen());
    RegimePathSampler sampler(aux, Measure::forward, 1.0);
    sampler.override_bound(0.5 * sampler.bound().lambda);
    RegimePath path;
    bool thrown = false;
    for (int k = 0; k < 2000 && !thrown; ++k) {
        PathRng rng(13, k);
        try {
            sampler.sample(0, rng, path);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::bound_violation);
            thrown = true;
        }
    }
    CHECK(thrown);
}

TEST_CASE("piecewise integrals are exact") {
    const RegimeModel m = make_shen();
    const AuxEngine aux(m);

    RegimePath constant;
    constant.horizon = 2.0;
    constant.initial_state = 1;
    constant.states = {1};
    PathIntegrals ints;
    accumulate_integrals(constant, aux, Measure::physical, ints);
    CHECK(ints.rate == doctest::Approx(2.0 * 0.04).epsilon(1e-15));
    CHECK(ints.cov(0, 0) == doctest::Approx(2.0 * 0.04).epsilon(1e-15));
    CHECK(ints.drift[0] == doctest::Approx(2.0 * (0.08 - 0.02)).epsilon(1e-15));

    RegimePath two;
    two.horizon = 1.0;
    two.initial_state = 0;
    two.times = {0.3};
    two.states = {0, 1};
    accumulate_integrals(two, aux, Measure::forward, ints);
    CHECK(ints.rate == doctest::Approx(0.3 * 0.02 + 0.7 * 0.04).epsilon(1e-14));
    CHECK(ints.cov(0, 0) == doctest::Approx(0.3 * 0.16 + 0.7 * 0.04).epsilon(1e-14));
    CHECK(ints.drift[0] ==
          doctest::Approx(0.3 * (0.02 - 0.08) + 0.7 * (0.04 - 0.02)).epsilon(1e-13));
}

TEST_CASE("forward discounting averages to the stochastic discount curve") {
    const RegimeModel m = make_shen();
    const AuxEngine aux(m);
    RegimePathSampler sampler(aux, Measure::forward, 1.0);
    RegimePath path;
    PathIntegrals ints;
    for (int i0 = 0; i0 < 2; ++i0) {
        double sum = 0.0, sum_sq = 0.0;
        const int n = 100000;
        for (int k = 0; k < n; ++k) {
            PathRng rng(101 + i0, derive_stream(4, k));
            sampler.sample(i0, rng, path);
            accumulate_integrals(path, aux, Measure::forward, ints);
            const double b = std::exp(-ints.rate);
            sum += b;
            sum_sq += b * b;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sum_sq / n - mean * mean) / n);
        CHECK(std::abs(mean - aux.beta(1.0)[i0]) < 3.0 * se);
    }
}

TEST_CASE("antithetic midpoint: the geometric mean of the pair is the drift point") {
    const AuxEngine aux(make_shen());
    TerminalSampler sampler(aux, Measure::forward, Eigen::VectorXd::Constant(1, 100.0), 1.0);
    TerminalSample a, b;
    for (int k = 0; k < 100; ++k) {
        PathRng rng(17, k);
        sampler.sample_pair(0, rng, a, b);
        CHECK(a.terminal[0] > 0.0);
        CHECK(b.terminal[0] > 0.0);
        const double mid = 0.5 * (std::log(a.terminal[0]) + std::log(b.terminal[0]));
        CHECK(mid == doctest::Approx(std::log(100.0) + a.integrals.drift[0]).epsilon(1e-12));
    }
}

TEST_CASE("single-regime forward terminals are lognormal (KS at 1%)") {
    const double r = 0.02, sig = 0.2, h = 1.0;
    const AuxEngine aux(make_single(0.05, sig, r));
    TerminalSampler sampler(aux, Measure::forward, Eigen::VectorXd::Constant(1, 100.0), h);
    TerminalSample a, b;
    const int n = 50000;
    std::vector<double> pooled;
    pooled.reserve(2 * n);
    const double mean = (r - 0.5 * sig * sig) * h, sd = sig * std::sqrt(h);
    for (int k = 0; k < n; ++k) {
        PathRng rng(19, derive_stream(5, k));
        sampler.sample_pair(0, rng, a, b);
        pooled.push_back(normal_cdf((std::log(a.terminal[0] / 100.0) - mean) / sd));
        pooled.push_back(normal_cdf((std::log(b.terminal[0] / 100.0) - mean) / sd));
    }
    // pairs are dependent, so use the pair count for the critical value
    const double d = ks_statistic(pooled);
    CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("antithetic legs share one marginal law (two-sample KS at 1%)") {
    const AuxEngine aux(make_shen());
    TerminalSampler sampler(aux, Measure::forward, Eigen::VectorXd::Constant(1, 100.0), 1.0);
    TerminalSample a, b;
    const int n = 40000;
    std::vector<double> leg1, leg2;
    for (int k = 0; k < n; ++k) {
        PathRng rng(23, derive_stream(6, k));
        sampler.sample_pair(1, rng, a, b);
        leg1.push_back(a.terminal[0]);
        leg2.push_back(b.terminal[0]);
    }
    const double d = ks_two_sample(leg1, leg2);
    CHECK(d < 1.628 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("forward terminal mean is the spot grossed up by the discount curve") {
    const AuxEngine aux(make_shen());
    const double h = 1.0;
    TerminalSampler sampler(aux, Measure::forward, Eigen::VectorXd::Constant(1, 100.0), h);
    TerminalSample a, b;
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        PathRng rng(29, derive_stream(7, k));
        sampler.sample_pair(0, rng, a, b);
        const double pair = 0.5 * (a.terminal[0] + b.terminal[0]);
        sum += pair;
        sum_sq += pair * pair;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    CHECK(std::abs(mean - 100.0 / aux.beta(h)[0]) < 3.0 * se);
}

TEST_CASE("check-measure tilt: E_chk[g(x)] = E_fwd[beta e^x g(x)] for three test functions") {
    const AuxEngine aux(make_shen());
    const double h = 1.0, s0 = 100.0;
    const double beta0 = aux.beta(h)[0];
    const double kink = std::log(110.0 / s0);
    TerminalSampler fwd(aux, Measure::forward, Eigen::VectorXd::Constant(1, s0), h);
    TerminalSampler chk(aux, Measure::check, Eigen::VectorXd::Constant(1, s0), h);
    TerminalSample a, b;
    const int n = 100000;
    double sf[3] = {0, 0, 0}, sf2[3] = {0, 0, 0};
    double sc[3] = {0, 0, 0}, sc2[3] = {0, 0, 0};
    const auto gs = [&](double x, int which) {
        return which == 0 ? x : which == 1 ? x * x : (x > kink ? 1.0 : 0.0);
    };
    for (int k = 0; k < n; ++k) {
        PathRng r1(31, derive_stream(8, k));
        fwd.sample_pair(0, r1, a, b);
        const double xa = std::log(a.terminal[0] / s0), xb = std::log(b.terminal[0] / s0);
        for (int w = 0; w < 3; ++w) {
            const double v =
                0.5 * beta0 * (std::exp(xa) * gs(xa, w) + std::exp(xb) * gs(xb, w));
            sf[w] += v;
            sf2[w] += v * v;
        }
        PathRng r2(37, derive_stream(9, k));
        chk.sample_pair(0, r2, a, b);
        const double ya = std::log(a.terminal[0] / s0), yb = std::log(b.terminal[0] / s0);
        for (int w = 0; w < 3; ++w) {
            const double v = 0.5 * (gs(ya, w) + gs(yb, w));
            sc[w] += v;
            sc2[w] += v * v;
        }
    }
    for (int w = 0; w < 3; ++w) {
        const double mf = sf[w] / n, mc = sc[w] / n;
        const double vf = sf2[w] / n - mf * mf;
        const double vc = sc2[w] / n - mc * mc;
        const double se = std::sqrt(std::max(vf, 0.0) / n + std::max(vc, 0.0) / n);
        CHECK(std::abs(mf - mc) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("degenerate covariance integral falls back to a clipped factor") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 1.0, 1.0, 1.0;  // rank one
    const Eigen::MatrixXd f = covariance_factor(cov);
    CHECK(((f * f.transpose()) - cov).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("two-asset forward terminals honor the martingale normalization per asset") {
    // correlated two-asset, two-regime model
    RegimeModel m;
    m.regimes = 2;
    m.assets = 2;
    Eigen::MatrixXd s1(2, 2), s2(2, 2);
    s1 << 0.30, 0.00, 0.12, 0.25;
    s2 << 0.18, 0.00, -0.05, 0.22;
    m.sigma = {s1, s2};
    m.mu = {Eigen::Vector2d(0.05, 0.02), Eigen::Vector2d(0.09, 0.07)};
    m.rate = Eigen::Vector2d(0.01, 0.03);
    m.generator = Eigen::MatrixXd(2, 2);
    m.generator << -0.8, 0.8, 0.6, -0.6;
    const AuxEngine aux(validate_model(std::move(m)));

    const double h = 1.0;
    Eigen::Vector2d s0(100.0, 50.0);
    TerminalSampler sampler(aux, Measure::forward, s0, h);
    TerminalSample a, b;
    const int n = 60000;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sum_sq = Eigen::Vector2d::Zero();
    for (int k = 0; k < n; ++k) {
        PathRng rng(47, derive_stream(13, k));
        sampler.sample_pair(0, rng, a, b);
        CHECK(a.terminal.minCoeff() > 0.0);
        const Eigen::Vector2d pair = 0.5 * (a.terminal + b.terminal);
        sum += pair;
        sum_sq += pair.cwiseProduct(pair);
    }
    const double beta0 = aux.beta(h)[0];
    for (int j = 0; j < 2; ++j) {
        const double mean = sum[j] / n;
        const double se = std::sqrt((sum_sq[j] / n - mean * mean) / n);
        CHECK(std::abs(mean - s0[j] / beta0) < 3.0 * se);
    }
}
