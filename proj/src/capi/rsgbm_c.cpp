#include "rsgbm/rsgbm.h"

#include <cstring>
#include <fstream>
#include <memory>

#include "core/auxfn.hpp"
#include "core/config.hpp"
#include "core/hedging.hpp"
#include "core/parallel.hpp"
#include "core/pricing.hpp"

namespace {

thread_local char tl_error[512] = "";

void set_error(const char* msg) {
    std::strncpy(tl_error, msg, sizeof(tl_error) - 1);
    tl_error[sizeof(tl_error) - 1] = '\0';
}

int map_code(rsgbm::ErrorCode c) {
    using EC = rsgbm::ErrorCode;
    switch (c) {
        case EC::io_error: return RSGBM_ERR_IO;
        case EC::parse_error: return RSGBM_ERR_PARSE;
        case EC::dimension_mismatch:
        case EC::invalid_generator:
        case EC::singular_covariance:
        case EC::negative_rate:
        case EC::non_positive_vol:
        case EC::no_valid_generator: return RSGBM_ERR_INVALID_MODEL;
        case EC::negative_time:
        case EC::bad_argument:
        case EC::missing_gradient: return RSGBM_ERR_BAD_ARG;
        case EC::multi_asset_unsupported: return RSGBM_ERR_UNSUPPORTED;
        default: return RSGBM_ERR_NUMERIC;
    }
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return RSGBM_OK;
    } catch (const rsgbm::Error& e) {
        set_error((std::string(rsgbm::error_code_name(e.code())) + ": " + e.what()).c_str());
        return map_code(e.code());
    } catch (const std::exception& e) {
        set_error(e.what());
        return RSGBM_ERR_NUMERIC;
    } catch (...) {
        set_error("unknown error");
        return RSGBM_ERR_NUMERIC;
    }
}

rsgbm::Payoff make_payoff(int kind, double strike) {
    if (kind == RSGBM_PAYOFF_CALL) return rsgbm::Payoff::call(strike);
    if (kind == RSGBM_PAYOFF_PUT) return rsgbm::Payoff::put(strike);
    rsgbm::fail(rsgbm::ErrorCode::bad_argument, "unknown payoff kind");
}

}  // namespace

struct rsgbm_model {
    rsgbm::AuxEngine aux;
    const rsgbm::RegimeModel& model;

    explicit rsgbm_model(rsgbm::RegimeModel m) : aux(std::move(m)), model(aux.model()) {}
};

extern "C" {

const char* rsgbm_version(void) { return "0.1.0"; }

const char* rsgbm_last_error(void) { return tl_error; }

int rsgbm_default_threads(void) { return rsgbm::default_threads(); }

int rsgbm_model_load(const char* path, int allow_approx, rsgbm_model** out) {
    if (!path || !out) {
        set_error("null pointer argument");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] { *out = new rsgbm_model(rsgbm::load_model(path, allow_approx != 0)); });
}

int rsgbm_model_load_string(const char* text, int allow_approx, rsgbm_model** out) {
    if (!text || !out) {
        set_error("null pointer argument");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded(
        [&] { *out = new rsgbm_model(rsgbm::load_model_string(text, allow_approx != 0)); });
}

void rsgbm_model_free(rsgbm_model* model) { delete model; }

int rsgbm_model_regimes(const rsgbm_model* m) { return m ? m->model.regimes : 0; }

int rsgbm_model_assets(const rsgbm_model* m) { return m ? m->model.assets : 0; }

int rsgbm_model_generator(const rsgbm_model* m, double* out) {
    if (!m || !out) {
        set_error("null pointer argument");
        return RSGBM_ERR_BAD_ARG;
    }
    const int l = m->model.regimes;
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j) out[i * l + j] = m->model.generator(i, j);
    return RSGBM_OK;
}

int rsgbm_model_risk(const rsgbm_model* m, double* mv, double* rho, double* ell) {
    if (!m) {
        set_error("null model");
        return RSGBM_ERR_BAD_ARG;
    }
    const auto& risk = m->aux.risk();
    const int l = m->model.regimes, d = m->model.assets;
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < d; ++j) {
            if (mv) mv[i * d + j] = risk.excess[i][j];
            if (rho) rho[i * d + j] = risk.rho[i][j];
        }
        if (ell) ell[i] = risk.ell[i];
    }
    return RSGBM_OK;
}

int rsgbm_generator_from_transition(const double* q, int n, double periods, int allow_approx,
                                    double* out) {
    if (!q || !out || n < 1) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        Eigen::MatrixXd qm(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) qm(i, j) = q[i * n + j];
        Eigen::MatrixXd gen;
        if (allow_approx) {
            try {
                gen = rsgbm::generator_from_transition(qm, periods);
            } catch (const rsgbm::Error& e) {
                if (e.code() != rsgbm::ErrorCode::no_valid_generator) throw;
                gen = rsgbm::generator_approximation(qm, periods);
            }
        } else {
            gen = rsgbm::generator_from_transition(qm, periods);
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out[i * n + j] = gen(i, j);
    });
}

int rsgbm_discrete_to_continuous(const double* means, const double* vols, int n, double periods,
                                 double* mu, double* sigma) {
    if (!means || !vols || !mu || !sigma || n < 1) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        Eigen::VectorXd mm = Eigen::Map<const Eigen::VectorXd>(means, n);
        Eigen::VectorXd vv = Eigen::Map<const Eigen::VectorXd>(vols, n);
        Eigen::VectorXd mu_out, sig_out;
        rsgbm::discrete_to_continuous(mm, vv, periods, mu_out, sig_out);
        for (int i = 0; i < n; ++i) {
            mu[i] = mu_out[i];
            sigma[i] = sig_out[i];
        }
    });
}

int rsgbm_aux_curves(const rsgbm_model* m, double horizon, int n_points, double* t, double* gamma,
                     double* delta, double* beta, double* neg_diag_tilde, double* neg_diag_arrow) {
    if (!m || n_points < 2 || !(horizon > 0.0)) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        const int l = m->model.regimes;
        rsgbm::AuxEngine::Scratch scratch;
        Eigen::VectorXd g, dl;
        Eigen::MatrixXd gen;
        for (int k = 0; k < n_points; ++k) {
            const double tk = horizon * static_cast<double>(k) / (n_points - 1);
            if (t) t[k] = tk;
            m->aux.gamma_into(tk, g, scratch);
            m->aux.delta_into(tk, dl, scratch);
            for (int i = 0; i < l; ++i) {
                if (gamma) gamma[k * l + i] = g[i];
                if (delta) delta[k * l + i] = dl[i];
                if (beta) beta[k * l + i] = dl[i] / g[i];
            }
            if (neg_diag_tilde) {
                m->aux.generator_at(rsgbm::GeneratorKind::tilde, tk, gen, scratch);
                for (int i = 0; i < l; ++i) neg_diag_tilde[k * l + i] = -gen(i, i);
            }
            if (neg_diag_arrow) {
                m->aux.generator_at(rsgbm::GeneratorKind::arrow, tk, gen, scratch);
                for (int i = 0; i < l; ++i) neg_diag_arrow[k * l + i] = -gen(i, i);
            }
        }
    });
}

int rsgbm_uniformization_bound(const rsgbm_model* m, int kind, double horizon, double* lambda_out) {
    if (!m || !lambda_out) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        rsgbm::GeneratorKind gk = kind == RSGBM_GEN_TILDE    ? rsgbm::GeneratorKind::tilde
                                  : kind == RSGBM_GEN_ARROW ? rsgbm::GeneratorKind::arrow
                                                            : rsgbm::GeneratorKind::physical;
        *lambda_out = m->aux.uniformization_bound(gk, horizon).lambda;
    });
}

int rsgbm_price_mc(const rsgbm_model* m, int payoff_kind, double strike, const double* s0,
                   int regime, double horizon, int64_t pairs, uint64_t seed, int threads,
                   double* value, double* half_width) {
    if (!m || !s0 || !value) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        rsgbm::McConfig cfg;
        cfg.pairs = pairs;
        cfg.seed = seed;
        cfg.threads = threads;
        const Eigen::VectorXd spot = Eigen::Map<const Eigen::VectorXd>(s0, m->model.assets);
        const auto est =
            rsgbm::mc_price(m->aux, make_payoff(payoff_kind, strike), spot, regime, horizon, cfg);
        *value = est.value;
        if (half_width) *half_width = est.half_width;
    });
}

int rsgbm_delta_mc(const rsgbm_model* m, int payoff_kind, double strike, const double* s0,
                   int regime, double horizon, int64_t pairs, uint64_t seed, int threads,
                   double* delta, double* half_width) {
    if (!m || !s0 || !delta) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        rsgbm::McConfig cfg;
        cfg.pairs = pairs;
        cfg.seed = seed;
        cfg.threads = threads;
        const Eigen::VectorXd spot = Eigen::Map<const Eigen::VectorXd>(s0, m->model.assets);
        const auto est =
            rsgbm::mc_delta(m->aux, make_payoff(payoff_kind, strike), spot, regime, horizon, cfg);
        for (int j = 0; j < m->model.assets; ++j) {
            delta[j] = est.value[j];
            if (half_width) half_width[j] = est.half_width[j];
        }
    });
}

int rsgbm_price_fourier(const rsgbm_model* m, int payoff_kind, double strike, double s0,
                        int regime, double horizon, double* value, double* delta_out) {
    if (!m || !value) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        const bool is_call = payoff_kind == RSGBM_PAYOFF_CALL;
        const auto est = is_call ? rsgbm::fourier_call(m->aux, strike, s0, regime, horizon)
                                 : rsgbm::fourier_put(m->aux, strike, s0, regime, horizon);
        *value = est.value;
        if (delta_out) {
            const double dc = rsgbm::fourier_call_delta(m->aux, strike, s0, regime, horizon);
            *delta_out = is_call ? dc : dc - 1.0;
        }
    });
}

int rsgbm_bs_price(double s0, double strike, double vol, double rate, double horizon, int is_call,
                   double* price, double* delta_out) {
    if (!price) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        const auto q = rsgbm::bs_price(s0, strike, vol, rate, horizon, is_call != 0);
        *price = q.price;
        if (delta_out) *delta_out = q.delta;
    });
}

int rsgbm_simulate_path(const rsgbm_model* m, int measure, int regime, double horizon,
                        uint64_t seed, uint64_t path_index, int* n_events, double* times,
                        int* states) {
    if (!m || !n_events) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        rsgbm::Measure ms = measure == RSGBM_MEASURE_FORWARD  ? rsgbm::Measure::forward
                            : measure == RSGBM_MEASURE_CHECK ? rsgbm::Measure::check
                                                             : rsgbm::Measure::physical;
        rsgbm::RegimePathSampler sampler(m->aux, ms, horizon);
        rsgbm::PathRng rng(seed, rsgbm::derive_stream(0x73696d2d70617468ull, path_index));
        rsgbm::RegimePath path;
        sampler.sample(regime, rng, path);
        const int capacity = *n_events;
        const int count = static_cast<int>(path.states.size());
        *n_events = count;
        if (times && states && capacity >= count) {
            for (int k = 0; k < count; ++k) {
                times[k] = k == 0 ? 0.0 : path.times[k - 1];
                states[k] = path.states[k];
            }
        }
    });
}

int rsgbm_hedge(const rsgbm_model* m, int payoff_kind, double strike, const double* s0, int regime,
                double horizon, int n_steps, int64_t n_paths, uint64_t seed, int threads,
                int use_nested_mc, int64_t inner_pairs, const char* dump_path,
                rsgbm_hedge_summary* out) {
    if (!m || !s0 || !out) {
        set_error("bad arguments");
        return RSGBM_ERR_BAD_ARG;
    }
    return guarded([&] {
        rsgbm::HedgeConfig cfg;
        cfg.n_steps = n_steps;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        cfg.threads = threads;
        if (use_nested_mc) cfg.pricer = rsgbm::HedgeConfig::PricerKind::nested_mc;
        if (inner_pairs > 0) cfg.inner_pairs = inner_pairs;
        const Eigen::VectorXd spot = Eigen::Map<const Eigen::VectorXd>(s0, m->model.assets);

        std::ofstream dump;
        rsgbm::HedgeRowSink sink;
        if (dump_path) {
            dump.open(dump_path);
            if (!dump) rsgbm::fail(rsgbm::ErrorCode::io_error, "cannot open dump file");
            dump << "path,t,S,tau,C,V,phi,G\n";
            dump.precision(12);
            sink = [&dump](const rsgbm::HedgeRow& r) {
                dump << r.path << ',' << r.t << ',' << r.spot[0] << ',' << r.regime + 1 << ','
                     << r.price << ',' << r.value << ',' << r.position[0] << ',' << r.error
                     << '\n';
            };
        }

        const auto stats = rsgbm::simulate_hedge(m->aux, make_payoff(payoff_kind, strike), spot,
                                                 regime, horizon, cfg, sink);
        std::memset(out, 0, sizeof(*out));
        out->n_paths = stats.n_paths;
        out->n_steps = stats.n_steps;
        out->initial_value = stats.initial_value;
        out->mean_g = stats.mean_g;
        out->sd_g = stats.sd_g;
        out->ci_half = stats.half_width;
        out->rms_hedging_error = stats.rms_hedging_error;
        out->coarse_fraction = stats.coarse_fraction;
        out->n_checkpoints = static_cast<int>(std::min<size_t>(stats.checkpoints.size(), 8));
        for (int c = 0; c < out->n_checkpoints; ++c) {
            const auto& cs = stats.checkpoints[c];
            out->checkpoint_t[c] = cs.t;
            out->gamma_g_mean[c] = cs.gamma_g_mean;
            out->gamma_g_ci[c] = cs.gamma_g_half;
            out->gamma_xg_mean[c] = cs.gamma_xg_mean[0];
            out->gamma_xg_ci[c] = cs.gamma_xg_half[0];
        }
        out->window_u = stats.window_u;
        out->window_v = stats.window_v;
        out->covstat_mean = stats.covstat_mean[0];
        out->covstat_ci = stats.covstat_half[0];
    });
}

}  // extern "C"
