#pragma once

#include "core/auxfn.hpp"
#include "core/rng.hpp"

namespace rsgbm {

// Sampling law for paths and terminal values:
//   physical: drift mu(i),        chain generator Lambda (constant)
//   forward:  log-drift r - a/2,  chain generator arrow(T-u) at calendar u
//   check:    log-drift r + a/2,  chain generator tilde(T-u), single asset only
enum class Measure { physical, forward, check };

GeneratorKind chain_kind(Measure m);

// Candidate times produced by the uniformized clock on [0, horizon]; states[k]
// is the regime on [times[k-1], times[k]) with times[-1] := 0, plus the final
// segment up to the horizon.  states.size() == times.size() + 1.
struct RegimePath {
    double horizon = 0.0;
    int initial_state = 0;
    std::vector<double> times;
    std::vector<int> states;

    int terminal_state() const { return states.back(); }
};

// Exact piecewise-constant integrals along a regime path.  drift is the
// measure's per-regime log-drift vector v(i); cov the d x d covariance.
struct PathIntegrals {
    double rate = 0.0;  // int r
    double ell = 0.0;   // int ell
    Eigen::VectorXd drift;
    Eigen::MatrixXd cov;
};

struct TerminalSample {
    Eigen::VectorXd terminal;  // S_T, strictly positive
    PathIntegrals integrals;
    bool antithetic = false;
};

// Uniformized sampler (one instance per thread; sample() reuses internal
// scratch).  Candidate count N ~ Poisson(lambda*T); ordered candidate times
// from n+1 exponentials; move i->j with probability G_ij/lambda where G is the
// measure's generator evaluated at the reversed argument T - t_k.  The bound
// is re-asserted at every candidate time.
class RegimePathSampler {
public:
    RegimePathSampler(const AuxEngine& aux, Measure measure, double horizon);

    const UniformizationBound& bound() const { return bound_; }
    // testing hook: a sampler with an externally supplied (possibly wrong) bound
    void override_bound(double lambda) { bound_.lambda = lambda; }

    void sample(int initial_state, PathRng& rng, RegimePath& out);
    // same dominating rate reused on a shorter horizon (valid: the generator
    // arguments stay inside [0, bound horizon])
    void sample(int initial_state, PathRng& rng, RegimePath& out, double horizon);

private:
    const AuxEngine* aux_;
    Measure measure_;
    double horizon_;
    UniformizationBound bound_;
    AuxEngine::Scratch scratch_;
    Eigen::MatrixXd gen_;
    std::vector<double> exp_buffer_;
};

void accumulate_integrals(const RegimePath& path, const AuxEngine& aux, Measure measure,
                          PathIntegrals& out);

// Terminal sampler: regime path by uniformization, then
//   log S_T = log s0 + int v + L z,  L L^T = int a,  z ~ N(0, I_d).
// The antithetic partner flips z on the same regime path.
class TerminalSampler {
public:
    TerminalSampler(const AuxEngine& aux, Measure measure, Eigen::VectorXd s0, double horizon);

    void sample_pair(int initial_state, PathRng& rng, TerminalSample& primary,
                     TerminalSample& partner);
    const RegimePath& last_path() const { return path_; }
    const RegimePathSampler& path_sampler() const { return path_sampler_; }

private:
    const AuxEngine* aux_;
    Measure measure_;
    Eigen::VectorXd s0_;
    Eigen::VectorXd log_s0_;
    double horizon_;
    RegimePathSampler path_sampler_;
    RegimePath path_;
    Eigen::VectorXd z_, shock_;
    Eigen::MatrixXd factor_;
};

// Cholesky factor of a covariance integral; falls back to an
// eigenvalue-clipped square root when the matrix is numerically singular
// (clip at 1e-14 * trace).
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov);

}  // namespace rsgbm
