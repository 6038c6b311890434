#include "core/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "core/parallel.hpp"

namespace rsgbm {

namespace {

constexpr std::uint64_t kMcStreamTag = 0x6d632d7061697273ull;  // mc pair streams

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

struct PairStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const PairStats& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double sd() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return var > 0.0 ? std::sqrt(var) : 0.0;
    }
    double half_width() const { return n > 1 ? 1.96 * sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

// Gauss-Legendre 15-point rule on [-1, 1]
constexpr int kGlPoints = 15;
constexpr double kGlX[kGlPoints] = {
    0.0,
    -0.2011940939974345, 0.2011940939974345,
    -0.3941513470775634, 0.3941513470775634,
    -0.5709721726085388, 0.5709721726085388,
    -0.7244177313601700, 0.7244177313601700,
    -0.8482065834104272, 0.8482065834104272,
    -0.9372733924007059, 0.9372733924007059,
    -0.9879925180204854, 0.9879925180204854,
};
constexpr double kGlW[kGlPoints] = {
    0.2025782419255613,
    0.1984314853271116, 0.1984314853271116,
    0.1861610000155622, 0.1861610000155622,
    0.1662692058169939, 0.1662692058169939,
    0.1395706779261543, 0.1395706779261543,
    0.1071592204671719, 0.1071592204671719,
    0.0703660474881081, 0.0703660474881081,
    0.0307532419961173, 0.0307532419961173,
};

// Frequency content of Im[e^{-iuk} psi(iu)]/u and the Gaussian decay scale,
// used to size quadrature panels.
struct TransformScales {
    double freq = 0.0;   // |k| plus the drift phase rate
    double decay = 0.0;  // sqrt(h * max_i a_i)
    double var_min = 0.0;  // h * min_i a_i (controls the tail truncation point)
};

TransformScales transform_scales(const AuxEngine& aux, double horizon, double k_abs) {
    const RegimeModel& m = aux.model();
    double drift_max = 0.0, a_max = 0.0, a_min = std::numeric_limits<double>::max();
    for (int i = 0; i < m.regimes; ++i) {
        const double a = m.cov[i](0, 0);
        drift_max = std::max(drift_max, std::abs(m.rate[i]) + a);
        a_max = std::max(a_max, a);
        a_min = std::min(a_min, a);
    }
    TransformScales s;
    s.freq = k_abs + horizon * drift_max;
    s.decay = std::sqrt(horizon * a_max);
    s.var_min = horizon * a_min;
    return s;
}

double panel_width(const TransformScales& s) {
    // a few oscillation periods per 15-point panel, capped by the width of the
    // Gaussian envelope
    const double osc = 4.0 * 2.0 * M_PI / (s.freq + 0.05);
    const double env = s.decay > 0.0 ? 2.5 / s.decay : osc;
    return std::min({osc, env, 64.0});
}

class TailIntegrator {
public:
    TailIntegrator(const AuxEngine& aux, int regime, double horizon, bool check_measure,
                   const FourierOptions& opts)
        : aux_(&aux), regime_(regime), horizon_(horizon), check_(check_measure), opts_(opts) {}

    std::complex<double> psi(double u) const {
        const std::complex<double> iu(0.0, u);
        return check_ ? aux_->check_charfn(regime_, horizon_, iu)
                      : aux_->forward_charfn(regime_, horizon_, iu);
    }

    // P(log(S_T/s) > k) = 1/2 + (1/pi) int_0^inf Im[e^{-iuk} psi(iu)]/u du
    double tail(double k) const {
        const TransformScales scales = transform_scales(*aux_, horizon_, std::abs(k));
        double width = panel_width(scales);
        double previous = std::numeric_limits<double>::quiet_NaN();
        for (int round = 0; round <= opts_.max_refinements; ++round) {
            const double integral = march(k, width);
            if (round > 0 && std::abs(integral - previous) <= 0.25 * opts_.prob_tol)
                return 0.5 + integral / M_PI;
            previous = integral;
            width *= 0.5;
        }
        fail(ErrorCode::quadrature_not_converged,
             "tail probability did not converge to tolerance under panel refinement");
    }

private:
    double march(double k, double width) const {
        double total = 0.0;
        double u0 = 0.0;
        int quiet_panels = 0;
        while (true) {
            const double u1 = u0 + width;
            double panel = 0.0;
            for (int j = 0; j < kGlPoints; ++j) {
                const double u = 0.5 * (u0 + u1) + 0.5 * width * kGlX[j];
                const std::complex<double> val = psi(u) * std::exp(std::complex<double>(0.0, -u * k));
                panel += kGlW[j] * val.imag() / u;
            }
            total += 0.5 * width * panel;
            u0 = u1;
            if (std::abs(psi(u0)) < opts_.trunc_ratio * u0)
                ++quiet_panels;
            else
                quiet_panels = 0;
            if (quiet_panels >= 2) break;
            if (u0 > opts_.max_u)
                fail(ErrorCode::quadrature_not_converged,
                     "transform kernel did not decay below the truncation threshold");
        }
        return total;
    }

    const AuxEngine* aux_;
    int regime_;
    double horizon_;
    bool check_;
    FourierOptions opts_;
};

PriceEstimate finish_fourier(double raw, int regime) {
    PriceEstimate est;
    est.method = "fourier";
    est.regime = regime;
    est.value = raw;
    if (raw < 0.0) {
        if (raw < -1e-8)
            fail(ErrorCode::quadrature_not_converged, "fourier price below the -1e-8 noise floor");
        est.value = 0.0;
        est.clipped = true;
    }
    return est;
}

}  // namespace

PriceEstimate mc_price(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0,
                       int regime, double horizon, const McConfig& cfg) {
    if (cfg.pairs < 2) fail(ErrorCode::bad_argument, "need at least 2 antithetic pairs");
    const double beta0 = aux.beta(horizon)[regime];
    const std::int64_t n_chunks = (cfg.pairs + cfg.chunk - 1) / cfg.chunk;
    std::vector<PairStats> partials(n_chunks);
    parallel_chunks(cfg.pairs, cfg.chunk, cfg.threads,
                    [&](std::int64_t chunk_idx, std::int64_t begin, std::int64_t end) {
                        TerminalSampler sampler(aux, Measure::forward, s0, horizon);
                        TerminalSample a, b;
                        PairStats& st = partials[chunk_idx];
                        for (std::int64_t p = begin; p < end; ++p) {
                            PathRng rng(cfg.seed, derive_stream(kMcStreamTag, p));
                            sampler.sample_pair(regime, rng, a, b);
                            st.add(0.5 * (payoff(a.terminal) + payoff(b.terminal)));
                        }
                    });
    PairStats total;
    for (const PairStats& p : partials) total.merge(p);
    PriceEstimate est;
    est.method = "mc";
    est.regime = regime;
    est.n = total.n;
    est.value = beta0 * total.mean();
    est.half_width = beta0 * total.half_width();
    return est;
}

McDelta mc_delta(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0, int regime,
                 double horizon, const McConfig& cfg) {
    if (cfg.pairs < 2) fail(ErrorCode::bad_argument, "need at least 2 antithetic pairs");
    if (!payoff.has_gradient())
        fail(ErrorCode::missing_gradient, "pathwise delta needs a payoff gradient");
    const double beta0 = aux.beta(horizon)[regime];
    const int d = aux.model().assets;
    const std::int64_t n_chunks = (cfg.pairs + cfg.chunk - 1) / cfg.chunk;
    std::vector<std::vector<PairStats>> partials(n_chunks, std::vector<PairStats>(d));
    parallel_chunks(cfg.pairs, cfg.chunk, cfg.threads,
                    [&](std::int64_t chunk_idx, std::int64_t begin, std::int64_t end) {
                        TerminalSampler sampler(aux, Measure::forward, s0, horizon);
                        TerminalSample a, b;
                        auto& st = partials[chunk_idx];
                        for (std::int64_t p = begin; p < end; ++p) {
                            PathRng rng(cfg.seed, derive_stream(kMcStreamTag, p));
                            sampler.sample_pair(regime, rng, a, b);
                            const Eigen::VectorXd ga =
                                a.terminal.cwiseProduct(payoff.gradient(a.terminal));
                            const Eigen::VectorXd gb =
                                b.terminal.cwiseProduct(payoff.gradient(b.terminal));
                            for (int j = 0; j < d; ++j)
                                st[j].add(0.5 * (ga[j] + gb[j]) / s0[j]);
                        }
                    });
    McDelta out;
    out.value.resize(d);
    out.half_width.resize(d);
    for (int j = 0; j < d; ++j) {
        PairStats total;
        for (const auto& chunk : partials) total.merge(chunk[j]);
        out.value[j] = beta0 * total.mean();
        out.half_width[j] = beta0 * total.half_width();
        out.pairs = total.n;
    }
    return out;
}

McCallJoint mc_call_joint(const AuxEngine& aux, double strike, double s0, int regime,
                          double horizon, const McConfig& cfg) {
    if (aux.model().assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "joint call statistics are single-asset");
    if (cfg.pairs < 2) fail(ErrorCode::bad_argument, "need at least 2 antithetic pairs");
    const double beta0 = aux.beta(horizon)[regime];
    const std::int64_t n_chunks = (cfg.pairs + cfg.chunk - 1) / cfg.chunk;
    struct Two {
        PairStats price, delta;
    };
    std::vector<Two> partials(n_chunks);
    Eigen::VectorXd spot(1);
    spot[0] = s0;
    parallel_chunks(cfg.pairs, cfg.chunk, cfg.threads,
                    [&](std::int64_t chunk_idx, std::int64_t begin, std::int64_t end) {
                        TerminalSampler sampler(aux, Measure::forward, spot, horizon);
                        TerminalSample a, b;
                        Two& st = partials[chunk_idx];
                        for (std::int64_t p = begin; p < end; ++p) {
                            PathRng rng(cfg.seed, derive_stream(kMcStreamTag, p));
                            sampler.sample_pair(regime, rng, a, b);
                            const double sa = a.terminal[0], sb = b.terminal[0];
                            const double pa = sa > strike ? sa - strike : 0.0;
                            const double pb = sb > strike ? sb - strike : 0.0;
                            st.price.add(0.5 * (pa + pb));
                            st.delta.add(0.5 * ((sa > strike ? sa : 0.0) + (sb > strike ? sb : 0.0)) /
                                         s0);
                        }
                    });
    PairStats price, delta;
    for (const Two& t : partials) {
        price.merge(t.price);
        delta.merge(t.delta);
    }
    McCallJoint out;
    out.price.method = out.delta.method = "mc";
    out.price.regime = out.delta.regime = regime;
    out.price.n = out.delta.n = price.n;
    out.price.value = beta0 * price.mean();
    out.price.half_width = beta0 * price.half_width();
    out.delta.value = beta0 * delta.mean();
    out.delta.half_width = beta0 * delta.half_width();
    return out;
}

PriceEstimate fourier_call(const AuxEngine& aux, double strike, double s0, int regime,
                           double horizon, const FourierOptions& opts) {
    if (aux.model().assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "the transform pricer is single-asset");
    if (!(strike > 0.0) || !(s0 > 0.0)) fail(ErrorCode::bad_argument, "strike and spot must be > 0");
    if (horizon <= 0.0) {
        PriceEstimate est = finish_fourier(std::max(0.0, s0 - strike), regime);
        return est;
    }
    const double k = std::log(strike / s0);
    const double p_chk = TailIntegrator(aux, regime, horizon, true, opts).tail(k);
    const double p_fwd = TailIntegrator(aux, regime, horizon, false, opts).tail(k);
    const double beta0 = aux.beta(horizon)[regime];
    return finish_fourier(s0 * p_chk - beta0 * strike * p_fwd, regime);
}

PriceEstimate fourier_put(const AuxEngine& aux, double strike, double s0, int regime,
                          double horizon, const FourierOptions& opts) {
    PriceEstimate est = fourier_call(aux, strike, s0, regime, horizon, opts);
    const double beta0 = horizon > 0.0 ? aux.beta(horizon)[regime] : 1.0;
    // parity: P = C - s0 + beta * K (forward price of S is s0/beta)
    return finish_fourier(est.value - s0 + beta0 * strike, regime);
}

double fourier_call_delta(const AuxEngine& aux, double strike, double s0, int regime,
                          double horizon, const FourierOptions& opts) {
    if (aux.model().assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "the transform pricer is single-asset");
    if (horizon <= 0.0) return s0 > strike ? 1.0 : 0.0;
    const double k = std::log(strike / s0);
    return TailIntegrator(aux, regime, horizon, true, opts).tail(k);
}

BsQuote bs_price(double s0, double strike, double vol, double rate, double horizon, bool is_call) {
    if (!(s0 > 0.0) || !(strike > 0.0) || !(vol > 0.0))
        fail(ErrorCode::bad_argument, "spot, strike and vol must be > 0");
    BsQuote q;
    if (horizon <= 0.0) {
        q.price = is_call ? std::max(0.0, s0 - strike) : std::max(0.0, strike - s0);
        q.delta = is_call ? (s0 > strike ? 1.0 : 0.0) : (s0 < strike ? -1.0 : 0.0);
        return q;
    }
    const double sq = vol * std::sqrt(horizon);
    const double d1 = (std::log(s0 / strike) + (rate + 0.5 * vol * vol) * horizon) / sq;
    const double d2 = d1 - sq;
    const double df = std::exp(-rate * horizon);
    if (is_call) {
        q.price = s0 * normal_cdf(d1) - strike * df * normal_cdf(d2);
        q.delta = normal_cdf(d1);
    } else {
        q.price = strike * df * normal_cdf(-d2) - s0 * normal_cdf(-d1);
        q.delta = normal_cdf(d1) - 1.0;
    }
    return q;
}

Eigen::VectorXd hedge_alpha(double value, const Eigen::VectorXd& grad, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& rho) {
    return grad + value * rho.cwiseQuotient(s);
}

FourierCallPricer::FourierCallPricer(const AuxEngine& aux, double strike, bool is_call,
                                     const FourierOptions& opts)
    : aux_(&aux), strike_(strike), is_call_(is_call), opts_(opts) {
    if (aux.model().assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "the transform pricer is single-asset");
    if (!(strike > 0.0)) fail(ErrorCode::bad_argument, "strike must be > 0");
}

void FourierCallPricer::prepare(const std::vector<double>& horizons, double k_abs_max) {
    const int l = aux_->model().regimes;
    nodes_.clear();
    nodes_.reserve(horizons.size());
    for (double h : horizons) {
        if (!(h > 0.0)) continue;
        NodeSet ns;
        ns.horizon = h;
        ns.beta = aux_->beta(h);
        const TransformScales scales = transform_scales(*aux_, h, k_abs_max);
        const double width = 0.5 * panel_width(scales);
        // march panels far enough that every regime's kernel is quiet
        double u0 = 0.0;
        int quiet = 0;
        while (quiet < 2) {
            const double u1 = u0 + width;
            for (int j = 0; j < kGlPoints; ++j)
                ns.u.push_back(0.5 * (u0 + u1) + 0.5 * width * kGlX[j]);
            u0 = u1;
            double worst = 0.0;
            for (int i = 0; i < l; ++i)
                worst = std::max(worst,
                                 std::abs(aux_->forward_charfn(i, h, std::complex<double>(0, u0))));
            quiet = worst < opts_.trunc_ratio * u0 ? quiet + 1 : 0;
            if (u0 > opts_.max_u)
                fail(ErrorCode::quadrature_not_converged,
                     "transform kernel did not decay below the truncation threshold");
        }
        const size_t n_nodes = ns.u.size();
        ns.coef_fwd.resize(static_cast<size_t>(l) * n_nodes);
        ns.coef_chk.resize(static_cast<size_t>(l) * n_nodes);
        const Eigen::VectorXd gam = aux_->gamma(h);
        const Eigen::VectorXd del = aux_->delta(h);
        for (size_t j = 0; j < n_nodes; ++j) {
            const double u = ns.u[j];
            const double w = 0.5 * width * kGlW[j % kGlPoints] / u;
            const std::complex<double> iu(0.0, u);
            const Eigen::VectorXcd hf =
                aux_->feynman_kac_h(h, iu - 1.0, 0.5 * iu * (iu - 1.0));
            const Eigen::VectorXcd hc = aux_->feynman_kac_h(h, iu, 0.5 * iu * (iu + 1.0));
            for (int i = 0; i < l; ++i) {
                ns.coef_fwd[static_cast<size_t>(i) * n_nodes + j] = w * hf[i] / del[i];
                ns.coef_chk[static_cast<size_t>(i) * n_nodes + j] = w * hc[i] / gam[i];
            }
        }
        nodes_.push_back(std::move(ns));
    }
    std::sort(nodes_.begin(), nodes_.end(),
              [](const NodeSet& a, const NodeSet& b) { return a.horizon < b.horizon; });
}

const FourierCallPricer::NodeSet* FourierCallPricer::find(double horizon) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), horizon,
                               [](const NodeSet& ns, double h) { return ns.horizon < h; });
    for (auto probe : {it, it == nodes_.begin() ? nodes_.end() : std::prev(it)}) {
        if (probe != nodes_.end() && std::abs(probe->horizon - horizon) <= 1e-12 * (1.0 + horizon))
            return &*probe;
    }
    return nullptr;
}

void FourierCallPricer::tails(const NodeSet& ns, double k, int regime, double& p_chk,
                              double& p_fwd) const {
    const size_t n_nodes = ns.u.size();
    const std::complex<double>* cf = ns.coef_fwd.data() + static_cast<size_t>(regime) * n_nodes;
    const std::complex<double>* cc = ns.coef_chk.data() + static_cast<size_t>(regime) * n_nodes;
    double acc_f = 0.0, acc_c = 0.0;
    for (size_t j = 0; j < n_nodes; ++j) {
        const double phase = -ns.u[j] * k;
        const double cs = std::cos(phase), sn = std::sin(phase);
        // Im[(cs + i sn) * c] = cs * Im(c) + sn * Re(c)
        acc_f += cs * cf[j].imag() + sn * cf[j].real();
        acc_c += cs * cc[j].imag() + sn * cc[j].real();
    }
    p_fwd = 0.5 + acc_f / M_PI;
    p_chk = 0.5 + acc_c / M_PI;
}

void FourierCallPricer::evaluate(double horizon, double s, int regime, double& value,
                                 double& dvalue) const {
    if (horizon <= 1e-14) {
        if (is_call_) {
            value = std::max(0.0, s - strike_);
            dvalue = s > strike_ ? 1.0 : 0.0;
        } else {
            value = std::max(0.0, strike_ - s);
            dvalue = s < strike_ ? -1.0 : 0.0;
        }
        return;
    }
    const double k = std::log(strike_ / s);
    double p_chk, p_fwd, beta0;
    if (const NodeSet* ns = find(horizon)) {
        tails(*ns, k, regime, p_chk, p_fwd);
        beta0 = ns->beta[regime];
    } else {
        p_chk = TailIntegrator(*aux_, regime, horizon, true, opts_).tail(k);
        p_fwd = TailIntegrator(*aux_, regime, horizon, false, opts_).tail(k);
        beta0 = aux_->beta(horizon)[regime];
    }
    p_chk = std::clamp(p_chk, 0.0, 1.0);
    p_fwd = std::clamp(p_fwd, 0.0, 1.0);
    double call = s * p_chk - beta0 * strike_ * p_fwd;
    if (call < 0.0) call = 0.0;
    if (is_call_) {
        value = call;
        dvalue = p_chk;
    } else {
        value = std::max(0.0, call - s + beta0 * strike_);
        dvalue = p_chk - 1.0;
    }
}

double FourierCallPricer::value_only(double horizon, double s, int regime) const {
    double v, dv;
    evaluate(horizon, s, regime, v, dv);
    return v;
}

}  // namespace rsgbm
