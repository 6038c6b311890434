#pragma once

#include <functional>
#include <optional>

#include "core/pricing.hpp"

namespace rsgbm {

struct HedgeConfig {
    int n_steps = 100;
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::int64_t chunk = 256;  // paths per reduction chunk

    enum class PricerKind { fourier, nested_mc };
    PricerKind pricer = PricerKind::fourier;
    std::int64_t inner_pairs = 20000;  // nested-MC inner antithetic pairs

    std::vector<double> checkpoint_fractions = {0.25, 0.5, 0.75};
    double window_u = 0.25, window_v = 0.75;  // fractions of T for E[G_T (X_V - X_U)]

    bool compare_strategies = false;
    double capital_shift = 0.5;  // perturbation of the initial capital
};

struct CheckpointStat {
    double t = 0.0;
    double gamma_g_mean = 0.0, gamma_g_half = 0.0;
    Eigen::VectorXd gamma_xg_mean, gamma_xg_half;
};

struct StrategyComparison {
    // quadratic hedging error estimates on common paths and the paired-diff
    // standard errors; he_* - he_optimal should be nonnegative within 1 SE
    double he_optimal = 0.0;
    double he_delta_only = 0.0, diff_delta_only_se = 0.0;
    double he_shift_up = 0.0, diff_shift_up_se = 0.0;
    double he_shift_down = 0.0, diff_shift_down_se = 0.0;
};

struct HedgeStats {
    std::int64_t n_paths = 0;
    int n_steps = 0;
    double initial_value = 0.0;  // C_0(s0, i0)
    double mean_g = 0.0, sd_g = 0.0, half_width = 0.0;
    double mean_abs_g = 0.0;
    double rms_hedging_error = 0.0;  // sqrt(mean G_T^2)
    std::vector<CheckpointStat> checkpoints;
    double window_u = 0.0, window_v = 0.0;
    Eigen::VectorXd covstat_mean, covstat_half;  // per asset, G_T (X_V - X_U)
    double coarse_fraction = 0.0;  // paths with > 10 jumps inside one grid interval
    std::optional<StrategyComparison> comparison;
};

// One record per grid time for optional per-path consumers (CSV dump, tests).
struct HedgeRow {
    std::int64_t path = 0;
    double t = 0.0;
    Eigen::VectorXd spot;
    int regime = 0;
    double discount = 0.0;  // B_t
    double price = 0.0;     // C_t(S_t, tau_t)
    double value = 0.0;     // V_t
    Eigen::VectorXd position;
    double error = 0.0;  // G_t
};
using HedgeRowSink = std::function<void(const HedgeRow&)>;

// Simulates the self-financing strategy under the physical law on the grid
// union the exact regime-jump times, rebalancing at grid times with
// phi = grad C(t, S, tau_-) + G_- rho(tau_-)/X.  The sink, when set, is called
// single-threaded (n_paths run on one worker).
HedgeStats simulate_hedge(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0,
                          int regime, double horizon, const HedgeConfig& cfg,
                          const HedgeRowSink& sink = nullptr);

struct DecompositionResult {
    std::int64_t n_paths = 0;
    int n_steps = 0;
    double rms_terminal_gap = 0.0;  // RMS of tracked G_T minus the reconstruction
};

// Rebuilds G_T from its semimartingale pieces (-int G dM, the price jumps at
// regime switches, and the tilde-generator drift) on the same paths and
// reports the terminal RMS gap; shrinks as the grid refines.  d = 1, call.
DecompositionResult hedge_decomposition(const AuxEngine& aux, double strike,
                                        const Eigen::VectorXd& s0, int regime, double horizon,
                                        const HedgeConfig& cfg);

}  // namespace rsgbm
