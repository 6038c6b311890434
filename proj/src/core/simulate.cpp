#include "core/simulate.hpp"

#include <cmath>

namespace rsgbm {

GeneratorKind chain_kind(Measure m) {
    switch (m) {
        case Measure::physical: return GeneratorKind::physical;
        case Measure::forward: return GeneratorKind::arrow;
        case Measure::check: return GeneratorKind::tilde;
    }
    return GeneratorKind::physical;
}

namespace {

// v(i) per measure, componentwise over assets
Eigen::VectorXd measure_drift(const AuxEngine& aux, Measure measure, int regime) {
    const RegimeModel& m = aux.model();
    const Eigen::VectorXd half_var = 0.5 * m.cov[regime].diagonal();
    switch (measure) {
        case Measure::physical: return m.mu[regime] - half_var;
        case Measure::forward:
            return Eigen::VectorXd::Constant(m.assets, m.rate[regime]) - half_var;
        case Measure::check:
            if (m.assets != 1)
                fail(ErrorCode::multi_asset_unsupported, "check-measure sampling requires d = 1");
            return Eigen::VectorXd::Constant(1, m.rate[regime]) + half_var;
    }
    return {};
}

}  // namespace

RegimePathSampler::RegimePathSampler(const AuxEngine& aux, Measure measure, double horizon)
    : aux_(&aux),
      measure_(measure),
      horizon_(horizon),
      bound_(aux.uniformization_bound(chain_kind(measure), horizon)) {
    if (measure == Measure::check && aux.model().assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "check-measure sampling requires d = 1");
}

void RegimePathSampler::sample(int initial_state, PathRng& rng, RegimePath& out) {
    sample(initial_state, rng, out, horizon_);
}

void RegimePathSampler::sample(int initial_state, PathRng& rng, RegimePath& out, double horizon) {
    const int l = aux_->model().regimes;
    if (initial_state < 0 || initial_state >= l)
        fail(ErrorCode::bad_argument, "initial regime out of range");
    if (horizon > horizon_ * (1.0 + 1e-12))
        fail(ErrorCode::bad_argument, "sampling horizon exceeds the bound's horizon");
    const double lambda = bound_.lambda;
    out.horizon = horizon;
    out.initial_state = initial_state;
    out.times.clear();
    out.states.clear();
    out.states.push_back(initial_state);

    const int n = rng.poisson(lambda * horizon);
    if (n == 0) return;

    // ordered uniforms via n+1 exponential spacings
    exp_buffer_.resize(n + 1);
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        exp_buffer_[k] = rng.exponential();
        total += exp_buffer_[k];
    }
    double running = 0.0;
    int state = initial_state;
    const GeneratorKind kind = chain_kind(measure_);
    for (int k = 0; k < n; ++k) {
        running += exp_buffer_[k];
        const double t_k = horizon * (running / total);
        aux_->generator_at(kind, horizon - t_k, gen_, scratch_);
        const double exit_rate = -gen_(state, state);
        if (exit_rate > lambda * (1.0 + 1e-12))
            fail(ErrorCode::bound_violation,
                 "uniformization bound violated at a candidate time; lambda too small");
        const double u = rng.uniform();
        double cum = 0.0;
        int next_state = state;
        for (int j = 0; j < l; ++j) {
            if (j == state) continue;
            cum += gen_(state, j) / lambda;
            if (u < cum) {
                next_state = j;
                break;
            }
        }
        state = next_state;
        out.times.push_back(t_k);
        out.states.push_back(state);
    }
}

void accumulate_integrals(const RegimePath& path, const AuxEngine& aux, Measure measure,
                          PathIntegrals& out) {
    const RegimeModel& m = aux.model();
    const int d = m.assets;
    out.rate = 0.0;
    out.ell = 0.0;
    out.drift = Eigen::VectorXd::Zero(d);
    out.cov = Eigen::MatrixXd::Zero(d, d);
    double prev = 0.0;
    const size_t n_seg = path.states.size();
    for (size_t k = 0; k < n_seg; ++k) {
        const double end = (k + 1 < n_seg) ? path.times[k] : path.horizon;
        const double dt = end - prev;
        if (dt > 0.0) {
            const int i = path.states[k];
            out.rate += m.rate[i] * dt;
            out.ell += aux.risk().ell[i] * dt;
            out.drift += measure_drift(aux, measure, i) * dt;
            out.cov += m.cov[i] * dt;
        }
        prev = end;
    }
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const double clip = 1e-14 * std::max(cov.trace(), 0.0);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(ev[i], clip));
    return es.eigenvectors() * ev.asDiagonal();
}

TerminalSampler::TerminalSampler(const AuxEngine& aux, Measure measure, Eigen::VectorXd s0,
                                 double horizon)
    : aux_(&aux),
      measure_(measure),
      s0_(std::move(s0)),
      horizon_(horizon),
      path_sampler_(aux, measure, horizon) {
    if (s0_.size() != aux.model().assets)
        fail(ErrorCode::dimension_mismatch, "spot vector length does not match d");
    if ((s0_.array() <= 0.0).any())
        fail(ErrorCode::bad_argument, "spot prices must be strictly positive");
    log_s0_ = s0_.array().log();
}

void TerminalSampler::sample_pair(int initial_state, PathRng& rng, TerminalSample& primary,
                                  TerminalSample& partner) {
    const int d = aux_->model().assets;
    path_sampler_.sample(initial_state, rng, path_);
    accumulate_integrals(path_, *aux_, measure_, primary.integrals);
    partner.integrals = primary.integrals;

    z_.resize(d);
    for (int j = 0; j < d; ++j) z_[j] = rng.normal();
    factor_ = covariance_factor(primary.integrals.cov);
    shock_.noalias() = factor_ * z_;

    primary.terminal = (log_s0_ + primary.integrals.drift + shock_).array().exp();
    primary.antithetic = false;
    partner.terminal = (log_s0_ + primary.integrals.drift - shock_).array().exp();
    partner.antithetic = true;
}

}  // namespace rsgbm
