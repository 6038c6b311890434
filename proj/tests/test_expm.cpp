#include <doctest.h>

#include "core/expm.hpp"
#include "core/rng.hpp"

using namespace rsgbm;

namespace {

Eigen::MatrixXd expm_series(const Eigen::MatrixXd& a, int terms = 60) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd term = out;
    for (int k = 1; k <= terms; ++k) {
        term = (term * a / static_cast<double>(k)).eval();
        out += term;
    }
    return out;
}

}  // namespace

TEST_CASE("expm matches the Taylor series on random small matrices") {
    PathRng rng(7, 1);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform() * 5);
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = 4.0 * (rng.uniform() - 0.5);
        const Eigen::MatrixXd e = expm(a);
        const Eigen::MatrixXd ref = expm_series(a);
        CHECK((e - ref).cwiseAbs().maxCoeff() < 1e-11 * ref.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("expm 1x1 and diagonal cases are exact") {
    Eigen::MatrixXd a(1, 1);
    a << -3.7;
    CHECK(expm(a)(0, 0) == doctest::Approx(std::exp(-3.7)).epsilon(1e-15));

    Eigen::MatrixXd d = Eigen::Vector3d(-0.5, 0.0, 2.0).asDiagonal();
    const Eigen::MatrixXd e = expm(d);
    for (int i = 0; i < 3; ++i)
        CHECK(e(i, i) == doctest::Approx(std::exp(d(i, i))).epsilon(1e-14));
}

TEST_CASE("expm of a generator scaled by time is row-stochastic") {
    Eigen::MatrixXd gen(3, 3);
    gen << -1.2, 0.7, 0.5, 0.3, -0.4, 0.1, 2.0, 1.0, -3.0;
    for (double t : {0.1, 1.0, 10.0}) {
        const Eigen::MatrixXd p = expm((t * gen).eval());
        for (int i = 0; i < 3; ++i) {
            CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
            for (int j = 0; j < 3; ++j) CHECK(p(i, j) >= -1e-12);
        }
    }
}

TEST_CASE("complex expm agrees with the real one on real inputs") {
    PathRng rng(11, 2);
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = 6.0 * (rng.uniform() - 0.5);
    const Eigen::MatrixXcd ec = expm(Eigen::MatrixXcd(a.cast<std::complex<double>>()));
    const Eigen::MatrixXd er = expm(a);
    CHECK((ec.real() - er).cwiseAbs().maxCoeff() < 1e-12 * er.cwiseAbs().maxCoeff());
    CHECK(ec.imag().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("workspace reuse gives identical results") {
    ExpmWorkspace<double> ws;
    Eigen::MatrixXd a(2, 2), out1, out2;
    a << -71.86, 71.86, 17.66, -17.66;
    Eigen::MatrixXd scaled = 0.01 * a;
    expm(scaled, out1, ws);
    Eigen::MatrixXd fresh = expm(scaled);
    expm(scaled, out2, ws);
    CHECK((out1 - fresh).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out1 - out2).cwiseAbs().maxCoeff() == 0.0);
}
