#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/error.hpp"

namespace rsgbm {

// Full market specification: l regimes, d assets, per-regime drift vector,
// volatility matrix, short rate, and the switching-rate generator.
// Instances are immutable after validate_model and safe to share across
// threads.
struct RegimeModel {
    int regimes = 0;  // l
    int assets = 0;   // d
    std::vector<Eigen::VectorXd> mu;     // drift per regime, length d (1/year)
    std::vector<Eigen::MatrixXd> sigma;  // volatility per regime, d x d (1/sqrt(year))
    std::vector<Eigen::MatrixXd> cov;    // sigma*sigma^T, cached by validate_model
    Eigen::VectorXd rate;                // instantaneous rate per regime (1/year)
    Eigen::MatrixXd generator;           // l x l switching rates (1/year)
};

// m(i) = mu(i) - r_i*1, rho(i) = cov(i)^-1 m(i), ell_i = m(i)^T cov(i)^-1 m(i)
struct RiskQuantities {
    std::vector<Eigen::VectorXd> excess;  // m
    std::vector<Eigen::VectorXd> rho;
    Eigen::VectorXd ell;
};

// Checks dimensions, generator structure (zero row sums, nonnegative
// off-diagonals), positive-definite covariances, nonnegative rates; caches
// cov.  Throws Error on violation.
RegimeModel validate_model(RegimeModel raw);

RiskQuantities risk_quantities(const RegimeModel& model);

// Principal matrix logarithm of a row-stochastic Q scaled by periods_per_year,
// via complex eigendecomposition.  Throws NoValidGenerator when the principal
// log does not exist as a real matrix or violates generator constraints; the
// message names the periods*(Q-I) approximation exposed by the CLI flag.
Eigen::MatrixXd generator_from_transition(const Eigen::MatrixXd& q, double periods_per_year);

// The crude first-order embedding periods*(Q-I); valid generator for any
// row-stochastic Q but does not round-trip through the matrix exponential.
Eigen::MatrixXd generator_approximation(const Eigen::MatrixXd& q, double periods_per_year);

// Per-period return mean/stdev -> annualized (mu, sigma):
//   sigma_i = sqrt(periods)*vol_i,  mu_i = periods*mean_i + sigma_i^2/2
void discrete_to_continuous(const Eigen::VectorXd& period_means,
                            const Eigen::VectorXd& period_vols, double periods_per_year,
                            Eigen::VectorXd& mu_out, Eigen::VectorXd& sigma_out);

}  // namespace rsgbm
