#pragma once

#include <complex>

#include "core/expm.hpp"
#include "core/model.hpp"

namespace rsgbm {

enum class GeneratorKind { physical, tilde, arrow };

struct UniformizationBound {
    double lambda = 0.0;  // dominating exit rate (1/year)
    GeneratorKind kind = GeneratorKind::physical;
    double horizon = 0.0;
    int grid_points = 0;
};

// Evaluator for the deterministic machinery derived from a validated model:
// the survival-discount vectors gamma/delta/beta, the time-dependent
// generators built from their ratios, the dominating rate for uniformized
// sampling, and the regime-averaged transform kernels used by the Fourier
// pricer.  All evaluations are matrix exponentials of small shifted
// generators, computed on demand.
//
// The allocating methods are pure and thread-safe; the *_into kernels write
// through a caller-owned Scratch and exist for per-thread hot loops.
class AuxEngine {
public:
    explicit AuxEngine(RegimeModel model);  // owns a copy; engines are self-contained

    const RegimeModel& model() const { return model_; }
    const RiskQuantities& risk() const { return risk_; }

    struct Scratch {
        ExpmWorkspace<double> ws;
        Eigen::MatrixXd mat;
        Eigen::VectorXd vec;
    };

    // gamma(t) = exp(t(Lambda - D(ell))) 1,  delta(t) = exp(t(Lambda - D(ell+r))) 1,
    // beta = delta/gamma componentwise.  t in years, t >= 0.
    Eigen::VectorXd gamma(double t) const;
    Eigen::VectorXd delta(double t) const;
    Eigen::VectorXd beta(double t) const;
    void gamma_into(double t, Eigen::VectorXd& out, Scratch& s) const;
    void delta_into(double t, Eigen::VectorXd& out, Scratch& s) const;

    // (G_t)_ij = Lambda_ij w_j(t)/w_i(t) off the diagonal, diagonal = -row sum;
    // w = gamma for tilde, w = delta for arrow.
    Eigen::MatrixXd tilde_generator(double t) const;
    Eigen::MatrixXd arrow_generator(double t) const;
    void generator_at(GeneratorKind kind, double t, Eigen::MatrixXd& out, Scratch& s) const;

    // lambda = (1+1e-3) * max over a 10001-point grid on [0,T] of -(G_t)_ii.
    // Samplers re-assert the bound at every candidate time.
    UniformizationBound uniformization_bound(GeneratorKind kind, double horizon) const;

    // h(t,th1,th2) = exp(t(D(th1*r + th2*a - ell) + Lambda)) 1 for d == 1.
    Eigen::VectorXcd feynman_kac_h(double t, std::complex<double> theta1,
                                   std::complex<double> theta2) const;

    // Transforms of log(S_T/s) given the start regime, horizon = T - t:
    //   forward:  h(horizon, theta-1, theta(theta-1)/2) / delta(horizon)
    //   check:    h(horizon, theta,   theta(theta+1)/2) / gamma(horizon)
    std::complex<double> forward_charfn(int regime, double horizon, std::complex<double> theta) const;
    std::complex<double> check_charfn(int regime, double horizon, std::complex<double> theta) const;

private:
    void require_nonnegative_time(double t) const;
    void require_single_asset() const;

    RegimeModel model_;
    RiskQuantities risk_;
    Eigen::MatrixXd gen_gamma_;  // Lambda - D(ell)
    Eigen::MatrixXd gen_delta_;  // Lambda - D(ell + r)
    Eigen::VectorXd cov_diag_;   // a_i for d == 1 transforms
};

}  // namespace rsgbm
