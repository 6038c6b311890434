#include "core/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace rsgbm {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kEigRatioFloor = 1e-12;  // smallest/largest eigenvalue of cov

std::string at_regime(int i) {
    std::ostringstream os;
    os << " (regime " << i + 1 << ")";
    return os.str();
}

}  // namespace

RegimeModel validate_model(RegimeModel raw) {
    const int l = raw.regimes;
    const int d = raw.assets;
    if (l < 1 || d < 1) fail(ErrorCode::dimension_mismatch, "need l >= 1 regimes and d >= 1 assets");
    if (static_cast<int>(raw.mu.size()) != l || static_cast<int>(raw.sigma.size()) != l ||
        raw.rate.size() != l)
        fail(ErrorCode::dimension_mismatch, "per-regime parameter count does not match l");
    if (raw.generator.rows() != l || raw.generator.cols() != l)
        fail(ErrorCode::dimension_mismatch, "generator is not l x l");

    for (int i = 0; i < l; ++i) {
        if (raw.mu[i].size() != d)
            fail(ErrorCode::dimension_mismatch, "mu has wrong length" + at_regime(i));
        if (raw.sigma[i].rows() != d || raw.sigma[i].cols() != d)
            fail(ErrorCode::dimension_mismatch, "sigma is not d x d" + at_regime(i));
        if (raw.rate[i] < 0.0)
            fail(ErrorCode::negative_rate, "negative instantaneous rate" + at_regime(i));
    }

    const double scale = std::max(1.0, raw.generator.cwiseAbs().maxCoeff());
    for (int i = 0; i < l; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < l; ++j) {
            row_sum += raw.generator(i, j);
            if (i != j && raw.generator(i, j) < 0.0)
                fail(ErrorCode::invalid_generator, "negative off-diagonal switching rate" + at_regime(i));
        }
        if (std::abs(row_sum) > kRowSumTol * scale)
            fail(ErrorCode::invalid_generator, "generator row does not sum to zero" + at_regime(i));
    }

    raw.cov.resize(l);
    for (int i = 0; i < l; ++i) {
        raw.cov[i] = raw.sigma[i] * raw.sigma[i].transpose();
        // enforce exact symmetry against rounding in the product
        raw.cov[i] = 0.5 * (raw.cov[i] + raw.cov[i].transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(raw.cov[i]);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        if (!(lo > kEigRatioFloor * hi))
            fail(ErrorCode::singular_covariance,
                 "sigma*sigma^T is numerically singular" + at_regime(i));
    }
    return raw;
}

RiskQuantities risk_quantities(const RegimeModel& model) {
    RiskQuantities rq;
    const int l = model.regimes;
    rq.excess.resize(l);
    rq.rho.resize(l);
    rq.ell.resize(l);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(model.assets);
    for (int i = 0; i < l; ++i) {
        rq.excess[i] = model.mu[i] - model.rate[i] * ones;
        rq.rho[i] = model.cov[i].llt().solve(rq.excess[i]);
        rq.ell[i] = rq.rho[i].dot(rq.excess[i]);
        if (rq.ell[i] < 0.0) rq.ell[i] = 0.0;  // roundoff guard; quadratic form is >= 0
    }
    return rq;
}

Eigen::MatrixXd generator_from_transition(const Eigen::MatrixXd& q, double periods_per_year) {
    const int l = static_cast<int>(q.rows());
    if (q.cols() != l || l < 1) fail(ErrorCode::dimension_mismatch, "transition matrix is not square");
    if (periods_per_year <= 0.0) fail(ErrorCode::bad_argument, "periods_per_year must be positive");
    for (int i = 0; i < l; ++i) {
        double row = 0.0;
        for (int j = 0; j < l; ++j) {
            if (q(i, j) < 0.0 || q(i, j) > 1.0)
                fail(ErrorCode::bad_argument, "transition probabilities must lie in [0,1]");
            row += q(i, j);
        }
        if (std::abs(row - 1.0) > 1e-8)
            fail(ErrorCode::bad_argument, "transition matrix rows must sum to 1");
    }

    const std::string fallback_note =
        "; the first-order approximation periods*(Q-I) is available via the CLI flag "
        "--approx-generator";

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(q.cast<std::complex<double>>());
    if (es.info() != Eigen::Success)
        fail(ErrorCode::no_valid_generator, "eigendecomposition of Q failed" + fallback_note);

    Eigen::VectorXcd log_ev(l);
    for (int i = 0; i < l; ++i) {
        const std::complex<double> ev = es.eigenvalues()[i];
        if (ev.real() <= 0.0 && std::abs(ev.imag()) < 1e-14)
            fail(ErrorCode::no_valid_generator,
                 "Q has a non-positive real eigenvalue, the real principal logarithm does not exist" +
                     fallback_note);
        log_ev[i] = std::log(ev);
    }
    Eigen::MatrixXcd vinv;
    {
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(es.eigenvectors());
        if (!lu.isInvertible())
            fail(ErrorCode::no_valid_generator,
                 "Q is defective, eigendecomposition cannot produce the principal logarithm" +
                     fallback_note);
        vinv = lu.inverse();
    }
    const Eigen::MatrixXcd log_q = es.eigenvectors() * log_ev.asDiagonal() * vinv;

    const double imag_max = log_q.imag().cwiseAbs().maxCoeff();
    if (imag_max > 1e-9)
        fail(ErrorCode::no_valid_generator,
             "principal logarithm of Q is not a real matrix" + fallback_note);

    Eigen::MatrixXd gen = periods_per_year * log_q.real();
    // symmetrize the row sums to exact zero; the log introduces ~1e-15 noise
    for (int i = 0; i < l; ++i) gen(i, i) -= gen.row(i).sum();
    const double scale = std::max(1.0, gen.cwiseAbs().maxCoeff());
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
            if (i != j && gen(i, j) < 0.0) {
                if (gen(i, j) < -1e-12 * scale)
                    fail(ErrorCode::no_valid_generator,
                         "principal logarithm of Q has negative off-diagonal rates" + fallback_note);
                gen(i, i) += gen(i, j);
                gen(i, j) = 0.0;
            }
    return gen;
}

Eigen::MatrixXd generator_approximation(const Eigen::MatrixXd& q, double periods_per_year) {
    const int l = static_cast<int>(q.rows());
    return periods_per_year * (q - Eigen::MatrixXd::Identity(l, l));
}

void discrete_to_continuous(const Eigen::VectorXd& period_means, const Eigen::VectorXd& period_vols,
                            double periods_per_year, Eigen::VectorXd& mu_out,
                            Eigen::VectorXd& sigma_out) {
    if (period_means.size() != period_vols.size())
        fail(ErrorCode::dimension_mismatch, "means and vols must have the same length");
    if (periods_per_year <= 0.0) fail(ErrorCode::bad_argument, "periods_per_year must be positive");
    const auto l = period_means.size();
    mu_out.resize(l);
    sigma_out.resize(l);
    for (Eigen::Index i = 0; i < l; ++i) {
        if (!(period_vols[i] > 0.0))
            fail(ErrorCode::non_positive_vol, "per-period volatility must be positive");
        sigma_out[i] = std::sqrt(periods_per_year) * period_vols[i];
        mu_out[i] = periods_per_year * period_means[i] + 0.5 * sigma_out[i] * sigma_out[i];
    }
}

}  // namespace rsgbm
