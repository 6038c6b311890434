#include "core/auxfn.hpp"

#include <cmath>

namespace rsgbm {

namespace {
constexpr int kBoundGridPoints = 10001;
constexpr double kBoundSafety = 1e-3;
}  // namespace

AuxEngine::AuxEngine(RegimeModel model)
    : model_(std::move(model)), risk_(risk_quantities(model_)) {
    const int l = model_.regimes;
    gen_gamma_ = model_.generator;
    gen_delta_ = model_.generator;
    for (int i = 0; i < l; ++i) {
        gen_gamma_(i, i) -= risk_.ell[i];
        gen_delta_(i, i) -= risk_.ell[i] + model_.rate[i];
    }
    if (model_.assets == 1) {
        cov_diag_.resize(l);
        for (int i = 0; i < l; ++i) cov_diag_[i] = model_.cov[i](0, 0);
    }
}

void AuxEngine::require_nonnegative_time(double t) const {
    if (!(t >= 0.0)) fail(ErrorCode::negative_time, "time argument must be >= 0");
}

void AuxEngine::require_single_asset() const {
    if (model_.assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "transform kernels require a single asset (d = 1)");
}

void AuxEngine::gamma_into(double t, Eigen::VectorXd& out, Scratch& s) const {
    require_nonnegative_time(t);
    s.mat = t * gen_gamma_;
    expm(s.mat, s.mat, s.ws);
    out.noalias() = s.mat * Eigen::VectorXd::Ones(model_.regimes);
}

void AuxEngine::delta_into(double t, Eigen::VectorXd& out, Scratch& s) const {
    require_nonnegative_time(t);
    s.mat = t * gen_delta_;
    expm(s.mat, s.mat, s.ws);
    out.noalias() = s.mat * Eigen::VectorXd::Ones(model_.regimes);
}

Eigen::VectorXd AuxEngine::gamma(double t) const {
    Scratch s;
    Eigen::VectorXd out;
    gamma_into(t, out, s);
    return out;
}

Eigen::VectorXd AuxEngine::delta(double t) const {
    Scratch s;
    Eigen::VectorXd out;
    delta_into(t, out, s);
    return out;
}

Eigen::VectorXd AuxEngine::beta(double t) const {
    Scratch s;
    Eigen::VectorXd g, d;
    gamma_into(t, g, s);
    delta_into(t, d, s);
    return d.cwiseQuotient(g);
}

void AuxEngine::generator_at(GeneratorKind kind, double t, Eigen::MatrixXd& out, Scratch& s) const {
    const int l = model_.regimes;
    if (kind == GeneratorKind::physical) {
        out = model_.generator;
        return;
    }
    if (kind == GeneratorKind::tilde)
        gamma_into(t, s.vec, s);
    else
        delta_into(t, s.vec, s);
    out.resize(l, l);
    for (int i = 0; i < l; ++i) {
        double row = 0.0;
        for (int j = 0; j < l; ++j) {
            if (i == j) continue;
            out(i, j) = model_.generator(i, j) * s.vec[j] / s.vec[i];
            row += out(i, j);
        }
        out(i, i) = -row;
    }
}

Eigen::MatrixXd AuxEngine::tilde_generator(double t) const {
    Scratch s;
    Eigen::MatrixXd out;
    generator_at(GeneratorKind::tilde, t, out, s);
    return out;
}

Eigen::MatrixXd AuxEngine::arrow_generator(double t) const {
    Scratch s;
    Eigen::MatrixXd out;
    generator_at(GeneratorKind::arrow, t, out, s);
    return out;
}

UniformizationBound AuxEngine::uniformization_bound(GeneratorKind kind, double horizon) const {
    if (!(horizon > 0.0)) fail(ErrorCode::bad_argument, "horizon must be positive");
    UniformizationBound b;
    b.kind = kind;
    b.horizon = horizon;
    b.grid_points = kBoundGridPoints;
    Scratch s;
    Eigen::MatrixXd g;
    double max_exit = 0.0;
    if (kind == GeneratorKind::physical) {
        for (int i = 0; i < model_.regimes; ++i)
            max_exit = std::max(max_exit, -model_.generator(i, i));
    } else {
        for (int k = 0; k < kBoundGridPoints; ++k) {
            const double t = horizon * static_cast<double>(k) / (kBoundGridPoints - 1);
            generator_at(kind, t, g, s);
            for (int i = 0; i < model_.regimes; ++i) max_exit = std::max(max_exit, -g(i, i));
        }
    }
    b.lambda = (1.0 + kBoundSafety) * max_exit;
    return b;
}

Eigen::VectorXcd AuxEngine::feynman_kac_h(double t, std::complex<double> theta1,
                                          std::complex<double> theta2) const {
    require_nonnegative_time(t);
    require_single_asset();
    const int l = model_.regimes;
    Eigen::MatrixXcd m = model_.generator.cast<std::complex<double>>();
    for (int i = 0; i < l; ++i)
        m(i, i) += theta1 * model_.rate[i] + theta2 * cov_diag_[i] - risk_.ell[i];
    m *= t;
    return expm(m) * Eigen::VectorXcd::Ones(l);
}

std::complex<double> AuxEngine::forward_charfn(int regime, double horizon,
                                               std::complex<double> theta) const {
    require_single_asset();
    const Eigen::VectorXcd h = feynman_kac_h(horizon, theta - 1.0, 0.5 * theta * (theta - 1.0));
    return h[regime] / delta(horizon)[regime];
}

std::complex<double> AuxEngine::check_charfn(int regime, double horizon,
                                             std::complex<double> theta) const {
    require_single_asset();
    const Eigen::VectorXcd h = feynman_kac_h(horizon, theta, 0.5 * theta * (theta + 1.0));
    return h[regime] / gamma(horizon)[regime];
}

}  // namespace rsgbm
