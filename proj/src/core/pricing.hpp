#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/payoff.hpp"
#include "core/simulate.hpp"

namespace rsgbm {

struct PriceEstimate {
    double value = 0.0;
    double half_width = 0.0;  // 95% CI half-width; 0 for deterministic methods
    std::int64_t n = 0;       // antithetic pairs for mc, 0 otherwise
    std::string method;       // "mc", "fourier", "black_scholes"
    int regime = 0;
    bool clipped = false;     // fourier value clipped up from small negative noise
};

struct McConfig {
    std::int64_t pairs = 100000;
    std::uint64_t seed = 0;
    int threads = 0;            // <= 0: hardware default
    std::int64_t chunk = 8192;  // pairs per reduction chunk (fixed => reproducible)
};

// value = beta_i(T) * mean over antithetic pairs of Phi(S_T) under the forward
// law; pairs are the CI observations.
PriceEstimate mc_price(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0,
                       int regime, double horizon, const McConfig& cfg);

// pathwise estimator beta_i(T) * mean(S_T^j dPhi_j(S_T)) / s0_j per asset
struct McDelta {
    Eigen::VectorXd value;
    Eigen::VectorXd half_width;
    std::int64_t pairs = 0;
};
McDelta mc_delta(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0, int regime,
                 double horizon, const McConfig& cfg);

// single pass computing both the call value and the pathwise initial position
// (d = 1); used by the table reproductions
struct McCallJoint {
    PriceEstimate price;
    PriceEstimate delta;
};
McCallJoint mc_call_joint(const AuxEngine& aux, double strike, double s0, int regime,
                          double horizon, const McConfig& cfg);

struct FourierOptions {
    double prob_tol = 1e-6;      // absolute tolerance per tail probability
    double trunc_ratio = 1e-10;  // truncate once |psi(iu)| < trunc_ratio * u
    double max_u = 1e7;          // hard frequency cap -> QuadratureNotConverged
    int max_refinements = 8;
};

// C = s0 * Pcheck(S_T > K) - beta_i(T) * K * Pfwd(S_T > K), each tail by
// Gil-Pelaez inversion of the transform kernels; d = 1.
PriceEstimate fourier_call(const AuxEngine& aux, double strike, double s0, int regime,
                           double horizon, const FourierOptions& opts = {});
PriceEstimate fourier_put(const AuxEngine& aux, double strike, double s0, int regime,
                          double horizon, const FourierOptions& opts = {});
// dC/ds = Pcheck(S_T > K)
double fourier_call_delta(const AuxEngine& aux, double strike, double s0, int regime,
                          double horizon, const FourierOptions& opts = {});

struct BsQuote {
    double price = 0.0;
    double delta = 0.0;
};
BsQuote bs_price(double s0, double strike, double vol, double rate, double horizon, bool is_call);

// alpha = grad + value * rho(i) / s componentwise (the position the
// self-financing construction corrects by the running hedge error)
Eigen::VectorXd hedge_alpha(double value, const Eigen::VectorXd& grad, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& rho);

// Call/put valuation for the hedge loop: per-horizon transform nodes are
// precomputed once so repeated (s, regime) queries are cheap.  evaluate() on a
// non-prepared horizon falls back to the adaptive integrator.
class FourierCallPricer {
public:
    FourierCallPricer(const AuxEngine& aux, double strike, bool is_call,
                      const FourierOptions& opts = {});

    // nodes valid for |log(K/s)| <= k_abs_max at each horizon (> 0)
    void prepare(const std::vector<double>& horizons, double k_abs_max);

    void evaluate(double horizon, double s, int regime, double& value, double& dvalue) const;
    double value_only(double horizon, double s, int regime) const;

private:
    struct NodeSet {
        double horizon = 0.0;
        std::vector<double> u;
        std::vector<std::complex<double>> coef_fwd, coef_chk;  // weight*psi(iu)/u, [regime*n_nodes + j]
        Eigen::VectorXd beta;
    };
    const NodeSet* find(double horizon) const;
    void tails(const NodeSet& ns, double k, int regime, double& p_chk, double& p_fwd) const;

    const AuxEngine* aux_;
    double strike_;
    bool is_call_;
    FourierOptions opts_;
    std::vector<NodeSet> nodes_;  // sorted by horizon
};

}  // namespace rsgbm
