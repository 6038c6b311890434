#include "core/hedging.hpp"

#include <cmath>

#include "core/parallel.hpp"

namespace rsgbm {

namespace {

constexpr std::uint64_t kHedgeStreamTag = 0x68656467652d7061ull;
constexpr std::uint64_t kNestedStreamTag = 0x6e65737465642d6dull;

struct Welford {
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t n = 0;
    void add(double x) { sum += x; sum_sq += x * x; ++n; }
    void merge(const Welford& o) { sum += o.sum; sum_sq += o.sum_sq; n += o.n; }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double var() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double sd() const { return std::sqrt(var()); }
    double se() const { return n ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
    double half_width() const { return 1.96 * se(); }
};

// Pricer interface used inside the hedge loop.  Implementations must be
// usable from the owning worker thread only.
class LoopPricer {
public:
    virtual ~LoopPricer() = default;
    virtual void evaluate(double horizon, const Eigen::VectorXd& s, int regime, double& value,
                          Eigen::VectorXd& grad) = 0;
    virtual double value_only(double horizon, const Eigen::VectorXd& s, int regime) = 0;
};

class FourierLoopPricer final : public LoopPricer {
public:
    explicit FourierLoopPricer(const FourierCallPricer& pricer) : pricer_(&pricer) {}
    void evaluate(double horizon, const Eigen::VectorXd& s, int regime, double& value,
                  Eigen::VectorXd& grad) override {
        grad.resize(1);
        pricer_->evaluate(horizon, s[0], regime, value, grad[0]);
    }
    double value_only(double horizon, const Eigen::VectorXd& s, int regime) override {
        return pricer_->value_only(horizon, s[0], regime);
    }

private:
    const FourierCallPricer* pricer_;
};

// Fresh forward-measure substream per (outer path, grid index) so the nested
// estimate is unbiased noise on top of a deterministic stream layout.
class NestedMcPricer final : public LoopPricer {
public:
    NestedMcPricer(const AuxEngine& aux, const Payoff& payoff, double total_horizon,
                   std::int64_t inner_pairs, std::uint64_t seed)
        : aux_(&aux),
          payoff_(&payoff),
          inner_pairs_(inner_pairs),
          seed_(seed),
          sampler_(aux, Measure::forward, total_horizon) {}

    void set_context(std::int64_t outer_path, int grid_index) {
        outer_ = outer_path;
        grid_ = grid_index;
    }

    void evaluate(double horizon, const Eigen::VectorXd& s, int regime, double& value,
                  Eigen::VectorXd& grad) override {
        const int d = aux_->model().assets;
        grad = Eigen::VectorXd::Zero(d);
        if (horizon <= 1e-14) {
            value = (*payoff_)(s);
            grad = payoff_->gradient(s);
            return;
        }
        const Eigen::VectorXd log_s = s.array().log();
        double sum_pay = 0.0;
        Eigen::VectorXd sum_grad = Eigen::VectorXd::Zero(d);
        PathRng rng(seed_, derive_stream(kNestedStreamTag, static_cast<std::uint64_t>(outer_),
                                         static_cast<std::uint64_t>(grid_)));
        RegimePath path;
        PathIntegrals ints;
        Eigen::VectorXd z(d), shock(d), s_up(d), s_dn(d);
        for (std::int64_t p = 0; p < inner_pairs_; ++p) {
            sampler_.sample(regime, rng, path, horizon);
            accumulate_integrals(path, *aux_, Measure::forward, ints);
            const Eigen::MatrixXd factor = covariance_factor(ints.cov);
            for (int j = 0; j < d; ++j) z[j] = rng.normal();
            shock.noalias() = factor * z;
            s_up = (log_s + ints.drift + shock).array().exp();
            s_dn = (log_s + ints.drift - shock).array().exp();
            sum_pay += 0.5 * ((*payoff_)(s_up) + (*payoff_)(s_dn));
            if (payoff_->has_gradient()) {
                sum_grad += 0.5 * (s_up.cwiseProduct(payoff_->gradient(s_up)) +
                                   s_dn.cwiseProduct(payoff_->gradient(s_dn)));
            }
        }
        const double beta0 = aux_->beta(horizon)[regime];
        const double inv_n = 1.0 / static_cast<double>(inner_pairs_);
        value = beta0 * sum_pay * inv_n;
        grad = beta0 * inv_n * sum_grad.cwiseQuotient(s);
    }

    double value_only(double horizon, const Eigen::VectorXd& s, int regime) override {
        double v;
        Eigen::VectorXd g;
        evaluate(horizon, s, regime, v, g);
        return v;
    }

private:
    const AuxEngine* aux_;
    const Payoff* payoff_;
    std::int64_t inner_pairs_;
    std::uint64_t seed_;
    RegimePathSampler sampler_;
    std::int64_t outer_ = 0;
    int grid_ = 0;
};

struct JumpEvent {
    double time = 0.0;
    int from = 0, to = 0;
};

// Exact homogeneous-chain jump schedule on [0, horizon] by exponential clocks.
void sample_jump_schedule(const Eigen::MatrixXd& gen, int i0, double horizon, PathRng& rng,
                          std::vector<JumpEvent>& out) {
    out.clear();
    const int l = static_cast<int>(gen.rows());
    int state = i0;
    double t = 0.0;
    while (true) {
        const double exit_rate = -gen(state, state);
        if (!(exit_rate > 0.0)) return;
        t += rng.exponential() / exit_rate;
        if (t >= horizon) return;
        const double u = rng.uniform();
        double cum = 0.0;
        int next = state;
        for (int j = 0; j < l; ++j) {
            if (j == state) continue;
            cum += gen(state, j) / exit_rate;
            if (u < cum) {
                next = j;
                break;
            }
        }
        out.push_back({t, state, next});
        state = next;
    }
}

struct SegmentEvolver {
    const RegimeModel* model;
    Eigen::VectorXd z;

    void advance(Eigen::VectorXd& spot, double& discount, double dt, int regime, PathRng& rng) {
        if (dt <= 0.0) return;
        const int d = model->assets;
        discount *= std::exp(-model->rate[regime] * dt);
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        const double sq = std::sqrt(dt);
        // exact lognormal segment: log S += (mu - diag(a)/2) dt + sigma sqrt(dt) z
        const Eigen::VectorXd drift =
            (model->mu[regime] - 0.5 * model->cov[regime].diagonal()) * dt;
        const Eigen::VectorXd shock = model->sigma[regime] * (sq * z);
        spot = (spot.array().log() + drift.array() + shock.array()).exp();
    }
};

struct PathOutputs {
    double g_terminal = 0.0;
    double he_optimal = 0.0;
    double he_delta_only = 0.0, he_shift_up = 0.0, he_shift_down = 0.0;
    std::vector<double> chk_gamma_g;                // per checkpoint
    std::vector<Eigen::VectorXd> chk_gamma_xg;      // per checkpoint, per asset
    Eigen::VectorXd covstat;                        // G_T (X_V - X_U)
    bool coarse = false;
};

struct GridContext {
    std::vector<double> grid;                     // t_0..t_n
    std::vector<Eigen::VectorXd> gamma_at_grid;   // gamma(T - t_k)
    std::vector<int> checkpoint_idx;
    int idx_u = 0, idx_v = 0;
};

void run_one_path(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0, int i0,
                  double horizon, const HedgeConfig& cfg, const GridContext& ctx,
                  LoopPricer& pricer, std::int64_t path_index, PathOutputs& out,
                  SegmentEvolver& evolver, const HedgeRowSink& sink) {
    const RegimeModel& model = aux.model();
    const RiskQuantities& risk = aux.risk();
    const int d = model.assets;
    const int n = cfg.n_steps;

    PathRng rng(cfg.seed, derive_stream(kHedgeStreamTag, static_cast<std::uint64_t>(path_index)));
    thread_local std::vector<JumpEvent> jumps;
    sample_jump_schedule(model.generator, i0, horizon, rng, jumps);

    Eigen::VectorXd spot = s0;
    double discount = 1.0;
    Eigen::VectorXd x_prev = spot;  // X_0 = s0
    Eigen::VectorXd x_u = spot, x_v = spot;

    if (auto* nested = dynamic_cast<NestedMcPricer*>(&pricer)) nested->set_context(path_index, 0);
    double price0;
    Eigen::VectorXd grad;
    pricer.evaluate(horizon, spot, i0, price0, grad);

    double v_opt = price0, v_del = price0;
    double v_up = price0 + cfg.capital_shift, v_dn = price0 - cfg.capital_shift;
    double g = 0.0;
    Eigen::VectorXd phi_opt = grad, phi_del = grad;
    Eigen::VectorXd phi_up =
        grad + (-cfg.capital_shift) * risk.rho[i0].cwiseQuotient(x_prev);
    Eigen::VectorXd phi_dn = grad + cfg.capital_shift * risk.rho[i0].cwiseQuotient(x_prev);

    if (sink)
        sink({path_index, 0.0, spot, i0, 1.0, price0, v_opt, phi_opt, 0.0});

    out.chk_gamma_g.assign(ctx.checkpoint_idx.size(), 0.0);
    out.chk_gamma_xg.assign(ctx.checkpoint_idx.size(), Eigen::VectorXd::Zero(d));
    out.coarse = false;

    size_t jump_ptr = 0;
    int state = i0;
    double price = price0;
    for (int k = 1; k <= n; ++k) {
        const double t_prev = ctx.grid[k - 1];
        const double t_k = ctx.grid[k];
        double seg_start = t_prev;
        int jumps_inside = 0;
        int left_state = state;
        while (jump_ptr < jumps.size() && jumps[jump_ptr].time <= t_k) {
            const JumpEvent& ev = jumps[jump_ptr];
            evolver.advance(spot, discount, ev.time - seg_start, state, rng);
            seg_start = ev.time;
            left_state = ev.time == t_k ? ev.from : ev.to;
            state = ev.to;
            ++jump_ptr;
            ++jumps_inside;
        }
        if (jumps_inside > 10) out.coarse = true;
        evolver.advance(spot, discount, t_k - seg_start, state, rng);

        const Eigen::VectorXd x_now = discount * spot;
        v_opt += phi_opt.dot(x_now - x_prev);
        if (cfg.compare_strategies) {
            v_del += phi_del.dot(x_now - x_prev);
            v_up += phi_up.dot(x_now - x_prev);
            v_dn += phi_dn.dot(x_now - x_prev);
        }

        if (k < n) {
            if (auto* nested = dynamic_cast<NestedMcPricer*>(&pricer))
                nested->set_context(path_index, k);
            pricer.evaluate(horizon - t_k, spot, state, price, grad);
        } else {
            price = payoff(spot);
        }
        g = discount * price - v_opt;

        if (k < n) {
            double g_left = g;
            Eigen::VectorXd grad_left = grad;
            if (left_state != state) {
                // a jump landed exactly on the grid time: the position is
                // predictable, so it sees the pre-jump regime
                double price_left;
                pricer.evaluate(horizon - t_k, spot, left_state, price_left, grad_left);
                g_left = discount * price_left - v_opt;
            }
            const Eigen::VectorXd rho_term = risk.rho[left_state].cwiseQuotient(x_now);
            phi_opt = grad_left + g_left * rho_term;
            if (cfg.compare_strategies) {
                phi_del = grad_left;
                phi_up = grad_left + (discount * price - v_up) * rho_term;
                phi_dn = grad_left + (discount * price - v_dn) * rho_term;
            }
        }

        for (size_t c = 0; c < ctx.checkpoint_idx.size(); ++c) {
            if (ctx.checkpoint_idx[c] == k) {
                const double gam = ctx.gamma_at_grid[k][state];
                out.chk_gamma_g[c] = gam * g;
                out.chk_gamma_xg[c] = gam * g * x_now;
            }
        }
        if (k == ctx.idx_u) x_u = x_now;
        if (k == ctx.idx_v) x_v = x_now;

        if (sink)
            sink({path_index, t_k, spot, state, discount, price, v_opt, phi_opt, g});
        x_prev = x_now;
    }

    out.g_terminal = g;
    out.he_optimal = g * g;
    if (cfg.compare_strategies) {
        const double target = discount * price;  // B_T Phi(S_T)
        out.he_delta_only = (target - v_del) * (target - v_del);
        out.he_shift_up = (target - v_up) * (target - v_up);
        out.he_shift_down = (target - v_dn) * (target - v_dn);
    }
    out.covstat = g * (x_v - x_u);
}

}  // namespace

HedgeStats simulate_hedge(const AuxEngine& aux, const Payoff& payoff, const Eigen::VectorXd& s0,
                          int regime, double horizon, const HedgeConfig& cfg,
                          const HedgeRowSink& sink) {
    const RegimeModel& model = aux.model();
    const int d = model.assets;
    if (cfg.n_steps < 1) fail(ErrorCode::bad_argument, "need at least one hedging step");
    if (cfg.pricer == HedgeConfig::PricerKind::fourier &&
        (d != 1 || payoff.kind == Payoff::Kind::custom))
        fail(ErrorCode::pricer_failure,
             "the transform pricer supports single-asset call/put payoffs; use the nested "
             "Monte Carlo pricer");
    if (!payoff.has_gradient())
        fail(ErrorCode::missing_gradient, "hedging needs a payoff gradient");

    const int n = cfg.n_steps;
    GridContext ctx;
    ctx.grid.resize(n + 1);
    ctx.gamma_at_grid.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        ctx.grid[k] = horizon * static_cast<double>(k) / n;
        ctx.gamma_at_grid[k] = aux.gamma(horizon - ctx.grid[k]);
    }
    for (double f : cfg.checkpoint_fractions)
        ctx.checkpoint_idx.push_back(
            std::clamp(static_cast<int>(std::lround(f * n)), 0, n));
    ctx.idx_u = std::clamp(static_cast<int>(std::lround(cfg.window_u * n)), 0, n);
    ctx.idx_v = std::clamp(static_cast<int>(std::lround(cfg.window_v * n)), 0, n);

    // shared transform node cache (immutable during the run)
    std::unique_ptr<FourierCallPricer> fourier;
    if (cfg.pricer == HedgeConfig::PricerKind::fourier) {
        fourier = std::make_unique<FourierCallPricer>(aux, payoff.strike,
                                                      payoff.kind == Payoff::Kind::call);
        std::vector<double> horizons;
        for (int k = 0; k < n; ++k) horizons.push_back(horizon - ctx.grid[k]);
        double a_max = 0.0, v_max = 0.0;
        for (int i = 0; i < model.regimes; ++i) {
            a_max = std::max(a_max, model.cov[i](0, 0));
            v_max = std::max(v_max, std::abs(model.mu[i](0)) + 0.5 * model.cov[i](0, 0));
        }
        const double k_span = std::abs(std::log(payoff.strike / s0[0])) + v_max * horizon +
                              8.0 * std::sqrt(a_max * horizon);
        fourier->prepare(horizons, k_span);
    }

    struct ChunkAccum {
        Welford g, abs_g, he_opt, he_del, he_up, he_dn, d_del, d_up, d_dn;
        std::vector<Welford> chk_g;
        std::vector<std::vector<Welford>> chk_xg;
        std::vector<Welford> covstat;
        std::int64_t coarse = 0;
    };
    const std::int64_t n_chunks = (cfg.n_paths + cfg.chunk - 1) / cfg.chunk;
    std::vector<ChunkAccum> partials(n_chunks);
    for (auto& p : partials) {
        p.chk_g.resize(ctx.checkpoint_idx.size());
        p.chk_xg.assign(ctx.checkpoint_idx.size(), std::vector<Welford>(d));
        p.covstat.resize(d);
    }

    const int threads = sink ? 1 : cfg.threads;
    parallel_chunks(cfg.n_paths, cfg.chunk, threads,
                    [&](std::int64_t chunk_idx, std::int64_t begin, std::int64_t end) {
                        std::unique_ptr<LoopPricer> pricer;
                        if (fourier)
                            pricer = std::make_unique<FourierLoopPricer>(*fourier);
                        else
                            pricer = std::make_unique<NestedMcPricer>(aux, payoff, horizon,
                                                                      cfg.inner_pairs, cfg.seed);
                        SegmentEvolver evolver{&model, Eigen::VectorXd(d)};
                        ChunkAccum& acc = partials[chunk_idx];
                        PathOutputs out;
                        for (std::int64_t p = begin; p < end; ++p) {
                            run_one_path(aux, payoff, s0, regime, horizon, cfg, ctx, *pricer, p,
                                         out, evolver, sink);
                            acc.g.add(out.g_terminal);
                            acc.abs_g.add(std::abs(out.g_terminal));
                            acc.he_opt.add(out.he_optimal);
                            if (cfg.compare_strategies) {
                                acc.he_del.add(out.he_delta_only);
                                acc.he_up.add(out.he_shift_up);
                                acc.he_dn.add(out.he_shift_down);
                                acc.d_del.add(out.he_delta_only - out.he_optimal);
                                acc.d_up.add(out.he_shift_up - out.he_optimal);
                                acc.d_dn.add(out.he_shift_down - out.he_optimal);
                            }
                            for (size_t c = 0; c < ctx.checkpoint_idx.size(); ++c) {
                                acc.chk_g[c].add(out.chk_gamma_g[c]);
                                for (int j = 0; j < d; ++j)
                                    acc.chk_xg[c][j].add(out.chk_gamma_xg[c][j]);
                            }
                            for (int j = 0; j < d; ++j) acc.covstat[j].add(out.covstat[j]);
                            if (out.coarse) ++acc.coarse;
                        }
                    });

    ChunkAccum total;
    total.chk_g.resize(ctx.checkpoint_idx.size());
    total.chk_xg.assign(ctx.checkpoint_idx.size(), std::vector<Welford>(d));
    total.covstat.resize(d);
    for (const ChunkAccum& p : partials) {
        total.g.merge(p.g);
        total.abs_g.merge(p.abs_g);
        total.he_opt.merge(p.he_opt);
        total.he_del.merge(p.he_del);
        total.he_up.merge(p.he_up);
        total.he_dn.merge(p.he_dn);
        total.d_del.merge(p.d_del);
        total.d_up.merge(p.d_up);
        total.d_dn.merge(p.d_dn);
        for (size_t c = 0; c < ctx.checkpoint_idx.size(); ++c) {
            total.chk_g[c].merge(p.chk_g[c]);
            for (int j = 0; j < d; ++j) total.chk_xg[c][j].merge(p.chk_xg[c][j]);
        }
        for (int j = 0; j < d; ++j) total.covstat[j].merge(p.covstat[j]);
        total.coarse += p.coarse;
    }

    HedgeStats stats;
    stats.n_paths = cfg.n_paths;
    stats.n_steps = n;
    {
        std::unique_ptr<LoopPricer> pricer;
        if (fourier)
            pricer = std::make_unique<FourierLoopPricer>(*fourier);
        else
            pricer = std::make_unique<NestedMcPricer>(aux, payoff, horizon, cfg.inner_pairs,
                                                      cfg.seed);
        if (auto* nested = dynamic_cast<NestedMcPricer*>(pricer.get()))
            nested->set_context(-1, 0);
        Eigen::VectorXd grad;
        pricer->evaluate(horizon, s0, regime, stats.initial_value, grad);
    }
    stats.mean_g = total.g.mean();
    stats.mean_abs_g = total.abs_g.mean();
    stats.sd_g = total.g.sd();
    stats.half_width = total.g.half_width();
    stats.rms_hedging_error = std::sqrt(total.he_opt.mean());
    for (size_t c = 0; c < ctx.checkpoint_idx.size(); ++c) {
        CheckpointStat cs;
        cs.t = ctx.grid[ctx.checkpoint_idx[c]];
        cs.gamma_g_mean = total.chk_g[c].mean();
        cs.gamma_g_half = total.chk_g[c].half_width();
        cs.gamma_xg_mean.resize(d);
        cs.gamma_xg_half.resize(d);
        for (int j = 0; j < d; ++j) {
            cs.gamma_xg_mean[j] = total.chk_xg[c][j].mean();
            cs.gamma_xg_half[j] = total.chk_xg[c][j].half_width();
        }
        stats.checkpoints.push_back(std::move(cs));
    }
    stats.window_u = ctx.grid[ctx.idx_u];
    stats.window_v = ctx.grid[ctx.idx_v];
    stats.covstat_mean.resize(d);
    stats.covstat_half.resize(d);
    for (int j = 0; j < d; ++j) {
        stats.covstat_mean[j] = total.covstat[j].mean();
        stats.covstat_half[j] = total.covstat[j].half_width();
    }
    stats.coarse_fraction =
        static_cast<double>(total.coarse) / static_cast<double>(cfg.n_paths);
    if (cfg.compare_strategies) {
        StrategyComparison cmp;
        cmp.he_optimal = total.he_opt.mean();
        cmp.he_delta_only = total.he_del.mean();
        cmp.diff_delta_only_se = total.d_del.se();
        cmp.he_shift_up = total.he_up.mean();
        cmp.diff_shift_up_se = total.d_up.se();
        cmp.he_shift_down = total.he_dn.mean();
        cmp.diff_shift_down_se = total.d_dn.se();
        stats.comparison = cmp;
    }
    return stats;
}

DecompositionResult hedge_decomposition(const AuxEngine& aux, double strike,
                                        const Eigen::VectorXd& s0, int regime, double horizon,
                                        const HedgeConfig& cfg) {
    const RegimeModel& model = aux.model();
    if (model.assets != 1)
        fail(ErrorCode::multi_asset_unsupported, "the decomposition check is single-asset");
    const RiskQuantities& risk = aux.risk();
    const int l = model.regimes;
    const int n = cfg.n_steps;

    FourierCallPricer pricer(aux, strike, true);
    std::vector<double> grid(n + 1), horizons;
    for (int k = 0; k <= n; ++k) grid[k] = horizon * static_cast<double>(k) / n;
    for (int k = 0; k < n; ++k) horizons.push_back(horizon - grid[k]);
    double a_max = 0.0, v_max = 0.0;
    for (int i = 0; i < l; ++i) {
        a_max = std::max(a_max, model.cov[i](0, 0));
        v_max = std::max(v_max, std::abs(model.mu[i](0)) + 0.5 * model.cov[i](0, 0));
    }
    pricer.prepare(horizons, std::abs(std::log(strike / s0[0])) + v_max * horizon +
                                 8.0 * std::sqrt(a_max * horizon));

    // tilde generator at each grid horizon, for the drift term
    std::vector<Eigen::MatrixXd> tilde(n);
    for (int k = 0; k < n; ++k) tilde[k] = aux.tilde_generator(horizon - grid[k]);

    Welford gap;
    SegmentEvolver evolver{&model, Eigen::VectorXd(1)};
    std::vector<JumpEvent> jumps;
    Eigen::VectorXd prices(l);
    for (std::int64_t p = 0; p < cfg.n_paths; ++p) {
        PathRng rng(cfg.seed, derive_stream(kHedgeStreamTag, static_cast<std::uint64_t>(p)));
        sample_jump_schedule(model.generator, regime, horizon, rng, jumps);

        Eigen::VectorXd spot = s0;
        double discount = 1.0;
        double x_prev = spot[0];
        double value, dvalue;
        pricer.evaluate(horizon, spot[0], regime, value, dvalue);
        double v = value;
        double phi = dvalue;
        double g_tracked = 0.0;
        double recon = 0.0;

        size_t jump_ptr = 0;
        int state = regime;
        for (int k = 1; k <= n; ++k) {
            const double t_k = grid[k];
            // left-point drift and dM pieces over [t_{k-1}, t_k)
            const double dt = grid[k] - grid[k - 1];
            double drift_term = 0.0;
            for (int j = 0; j < l; ++j) {
                pricer.evaluate(horizon - grid[k - 1], spot[0], j, prices[j], dvalue);
                drift_term += tilde[k - 1](state, j) * prices[j];
            }
            recon -= discount * drift_term * dt;
            const double g_before = g_tracked;
            const double x_before = x_prev;
            const int state_before = state;

            double seg_start = grid[k - 1];
            while (jump_ptr < jumps.size() && jumps[jump_ptr].time <= t_k) {
                const JumpEvent& ev = jumps[jump_ptr];
                evolver.advance(spot, discount, ev.time - seg_start, state, rng);
                seg_start = ev.time;
                // price jump at the regime switch
                double c_new, c_old;
                pricer.evaluate(horizon - ev.time, spot[0], ev.to, c_new, dvalue);
                pricer.evaluate(horizon - ev.time, spot[0], ev.from, c_old, dvalue);
                recon += discount * (c_new - c_old);
                state = ev.to;
                ++jump_ptr;
            }
            evolver.advance(spot, discount, t_k - seg_start, state, rng);
            const double x_now = discount * spot[0];
            v += phi * (x_now - x_prev);
            double price;
            if (k < n) {
                pricer.evaluate(horizon - t_k, spot[0], state, price, dvalue);
            } else {
                price = std::max(0.0, spot[0] - strike);
                dvalue = spot[0] > strike ? 1.0 : 0.0;
            }
            g_tracked = discount * price - v;
            phi = dvalue + g_tracked * risk.rho[state][0] / x_now;

            // -int G dM with M = int rho dX / X, left-point
            recon -= g_before * risk.rho[state_before][0] * (x_now - x_before) / x_before;
            x_prev = x_now;
        }
        gap.add(g_tracked - recon);
    }

    DecompositionResult res;
    res.n_paths = cfg.n_paths;
    res.n_steps = n;
    res.rms_terminal_gap = std::sqrt(gap.sum_sq / static_cast<double>(gap.n));
    return res;
}

}  // namespace rsgbm
