#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

// Dense matrix exponential by scaling-and-squaring with diagonal Pade
// approximants (degree 3/5/7/9/13 ladder).  Small matrices only; the
// workspace overload performs no allocations after the first call with a
// given size, which matters in the path-sampling hot loop.

namespace rsgbm {

template <typename Scalar>
struct ExpmWorkspace {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Mat a2, a4, a6, u, v, w, num, den, scaled;
    Eigen::PartialPivLU<Mat> lu;

    void resize(Eigen::Index n) {
        if (a2.rows() == n) return;
        a2.resize(n, n); a4.resize(n, n); a6.resize(n, n);
        u.resize(n, n); v.resize(n, n); w.resize(n, n);
        num.resize(n, n); den.resize(n, n); scaled.resize(n, n);
    }
};

namespace detail {

template <typename Mat>
double one_norm(const Mat& a) {
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

// pade_uv computes U = A*poly_odd(A^2), V = poly_even(A^2) for the given
// coefficient table (b0..bm).
template <typename Scalar>
void pade_3_9(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a, int degree,
              ExpmWorkspace<Scalar>& ws) {
    static const double b3[] = {120, 60, 12, 1};
    static const double b5[] = {30240, 15120, 3360, 420, 30, 1};
    static const double b7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400.,
                                30270240., 2162160., 110880., 3960., 90., 1.};
    const double* b = degree == 3 ? b3 : degree == 5 ? b5 : degree == 7 ? b7 : b9;
    const auto n = a.rows();
    const auto id = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);

    ws.a2.noalias() = a * a;
    // Horner in A^2
    ws.w = b[degree] * ws.a2 + b[degree - 2] * id;
    for (int k = degree - 4; k >= 1; k -= 2) {
        ws.num.noalias() = ws.w * ws.a2;
        ws.w = ws.num + b[k] * id;
    }
    ws.u.noalias() = a * ws.w;
    ws.v = b[degree - 1] * ws.a2 + b[degree - 3] * id;
    for (int k = degree - 5; k >= 0; k -= 2) {
        ws.num.noalias() = ws.v * ws.a2;
        ws.v = ws.num + b[k] * id;
    }
}

template <typename Scalar>
void pade_13(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
             ExpmWorkspace<Scalar>& ws) {
    static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                               1187353796428800.,  129060195264000.,   10559470521600.,
                               670442572800.,      33522128640.,       1323241920.,
                               40840800.,          960960.,            16380.,
                               182.,               1.};
    const auto n = a.rows();
    const auto id = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
    ws.a2.noalias() = a * a;
    ws.a4.noalias() = ws.a2 * ws.a2;
    ws.a6.noalias() = ws.a4 * ws.a2;
    ws.w = b[13] * ws.a6 + b[11] * ws.a4 + b[9] * ws.a2;
    ws.num.noalias() = ws.a6 * ws.w;
    ws.w = ws.num + b[7] * ws.a6 + b[5] * ws.a4 + b[3] * ws.a2 + b[1] * id;
    ws.u.noalias() = a * ws.w;
    ws.w = b[12] * ws.a6 + b[10] * ws.a4 + b[8] * ws.a2;
    ws.num.noalias() = ws.a6 * ws.w;
    ws.v = ws.num + b[6] * ws.a6 + b[4] * ws.a4 + b[2] * ws.a2 + b[0] * id;
}

}  // namespace detail

// `out` may alias `a`: the input is only read before the result is written.
template <typename Scalar>
void expm(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
          Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& out,
          ExpmWorkspace<Scalar>& ws) {
    const auto n = a.rows();
    out.resize(n, n);
    if (n == 1) {
        out(0, 0) = std::exp(a(0, 0));
        return;
    }
    ws.resize(n);

    const double nrm = detail::one_norm(a);
    // Higham's theta thresholds for degrees 3,5,7,9,13.
    int squarings = 0;
    if (nrm <= 1.495585217958292e-2) {
        detail::pade_3_9(a, 3, ws);
    } else if (nrm <= 2.539398330063230e-1) {
        detail::pade_3_9(a, 5, ws);
    } else if (nrm <= 9.504178996162932e-1) {
        detail::pade_3_9(a, 7, ws);
    } else if (nrm <= 2.097847961257068) {
        detail::pade_3_9(a, 9, ws);
    } else {
        const double theta13 = 5.371920351148152;
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / theta13))));
        ws.scaled = a * Scalar(std::ldexp(1.0, -squarings));
        detail::pade_13(ws.scaled, ws);
    }
    ws.num = ws.v + ws.u;
    ws.den = ws.v - ws.u;
    ws.lu.compute(ws.den);
    out = ws.lu.solve(ws.num);
    for (int k = 0; k < squarings; ++k) {
        ws.w.noalias() = out * out;
        out.swap(ws.w);
    }
}

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    ExpmWorkspace<double> ws;
    Eigen::MatrixXd out;
    expm(a, out, ws);
    return out;
}

inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
    ExpmWorkspace<std::complex<double>> ws;
    Eigen::MatrixXcd out;
    expm(a, out, ws);
    return out;
}

}  // namespace rsgbm
