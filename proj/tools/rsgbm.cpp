// rsgbm command-line front-end.  Talks to the core exclusively through the C
// API in rsgbm/rsgbm.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rsgbm/rsgbm.h"

using nlohmann::json;

namespace {

int exit_code_for(int rc) {
    switch (rc) {
        case RSGBM_OK: return 0;
        case RSGBM_ERR_NUMERIC:
        case RSGBM_ERR_UNSUPPORTED: return 2;
        default: return 1;  // io / parse / invalid model / bad argument
    }
}

[[noreturn]] void die(int rc) {
    std::fprintf(stderr, "error: %s\n", rsgbm_last_error());
    std::exit(exit_code_for(rc));
}

void check(int rc) {
    if (rc != RSGBM_OK) die(rc);
}

struct ModelHandle {
    rsgbm_model* m = nullptr;
    ~ModelHandle() { rsgbm_model_free(m); }
};

void load(ModelHandle& h, const std::string& path, bool approx) {
    check(rsgbm_model_load(path.c_str(), approx ? 1 : 0, &h.m));
}

int resolve_threads(int threads_opt) {
    if (threads_opt > 0) return threads_opt;
    if (const char* env = std::getenv("RSGBM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0;  // library default
}

int payoff_code(const std::string& name) {
    if (name == "call") return RSGBM_PAYOFF_CALL;
    if (name == "put") return RSGBM_PAYOFF_PUT;
    std::fprintf(stderr, "error: unsupported payoff '%s'\n", name.c_str());
    std::exit(1);
}

struct TableSpec {
    std::string config;
    std::vector<double> strikes;
    double s0;
    double horizon;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regime-switching option pricing and variance-optimal hedging"};
    app.require_subcommand(1);

    // ---- model check ----
    std::string check_file;
    bool check_approx = false, check_json = false;
    auto* cmd_model = app.add_subcommand("model", "model utilities");
    auto* cmd_check = cmd_model->add_subcommand("check", "validate a config and print m, rho, ell");
    cmd_check->add_option("file", check_file)->required();
    cmd_check->add_flag("--approx-generator", check_approx,
                        "fall back to periods*(Q-I) when Q has no exact generator");
    cmd_check->add_flag("--json", check_json);

    // ---- auxfn dump ----
    std::string aux_file;
    double aux_T = 1.0;
    int aux_points = 201;
    bool aux_json = false, aux_approx = false;
    auto* cmd_auxfn = app.add_subcommand("auxfn", "deterministic curve utilities");
    auto* cmd_dump = cmd_auxfn->add_subcommand(
        "dump", "CSV of gamma, delta, beta and generator diagonals on [0, T]");
    cmd_dump->add_option("file", aux_file)->required();
    cmd_dump->add_option("--T", aux_T, "horizon in years")->required();
    cmd_dump->add_option("--points", aux_points, "number of rows");
    cmd_dump->add_flag("--approx-generator", aux_approx);
    cmd_dump->add_flag("--json", aux_json);

    // ---- price ----
    std::string price_file, price_payoff = "call", price_method = "mc";
    double price_strike = 100.0, price_s0 = 100.0, price_T = 1.0;
    int price_regime = 1, price_threads = 0;
    std::int64_t price_n = 100000;
    std::uint64_t price_seed = 0;
    bool price_full = false, price_json = false, price_approx = false;
    auto* cmd_price = app.add_subcommand("price", "one option valuation");
    cmd_price->add_option("file", price_file)->required();
    cmd_price->add_option("--payoff", price_payoff, "call|put");
    cmd_price->add_option("--strike", price_strike)->required();
    cmd_price->add_option("--s0", price_s0)->required();
    cmd_price->add_option("--regime", price_regime, "starting regime, 1-based");
    cmd_price->add_option("--T", price_T, "maturity in years")->required();
    cmd_price->add_option("--method", price_method, "mc|fourier");
    cmd_price->add_option("--n,--pairs", price_n, "antithetic pairs for mc");
    cmd_price->add_option("--seed", price_seed);
    cmd_price->add_option("--threads", price_threads);
    cmd_price->add_flag("--full", price_full, "use 5e5 pairs (1e6 simulations)");
    cmd_price->add_flag("--approx-generator", price_approx);
    cmd_price->add_flag("--json", price_json);

    // ---- reproduce ----
    std::string rep_table, rep_config;
    std::int64_t rep_pairs = 100000;
    std::uint64_t rep_seed = 0;
    int rep_threads = 0;
    bool rep_full = false, rep_json = false;
    auto* cmd_rep = app.add_subcommand("reproduce", "benchmark tables with CIs");
    cmd_rep->add_option("table", rep_table, "shen-table2|apple-table8")->required();
    cmd_rep->add_option("--config", rep_config, "model config override");
    cmd_rep->add_option("--pairs", rep_pairs, "antithetic pairs per cell");
    cmd_rep->add_option("--seed", rep_seed);
    cmd_rep->add_option("--threads", rep_threads);
    cmd_rep->add_flag("--full", rep_full, "5e5 pairs (the tables' 1e6 simulations)");
    cmd_rep->add_flag("--json", rep_json);

    // ---- hedge ----
    std::string hedge_file, hedge_payoff = "call", hedge_dump;
    double hedge_strike = 100.0, hedge_s0 = 100.0, hedge_T = 1.0;
    int hedge_regime = 1, hedge_steps = 100, hedge_threads = 0;
    std::int64_t hedge_paths = 10000, hedge_inner = 20000;
    std::uint64_t hedge_seed = 0;
    bool hedge_nested = false, hedge_json = false, hedge_approx = false;
    auto* cmd_hedge = app.add_subcommand("hedge", "simulate the optimal strategy; JSON summary");
    cmd_hedge->add_option("file", hedge_file)->required();
    cmd_hedge->add_option("--payoff", hedge_payoff, "call|put");
    cmd_hedge->add_option("--strike", hedge_strike)->required();
    cmd_hedge->add_option("--s0", hedge_s0)->required();
    cmd_hedge->add_option("--regime", hedge_regime, "starting regime, 1-based");
    cmd_hedge->add_option("--T", hedge_T, "maturity in years")->required();
    cmd_hedge->add_option("--steps", hedge_steps);
    cmd_hedge->add_option("--paths", hedge_paths);
    cmd_hedge->add_option("--seed", hedge_seed);
    cmd_hedge->add_option("--threads", hedge_threads);
    cmd_hedge->add_flag("--nested-mc", hedge_nested, "nested Monte Carlo pricer in the loop");
    cmd_hedge->add_option("--inner", hedge_inner, "inner pairs for the nested pricer");
    cmd_hedge->add_option("--dump", hedge_dump, "per-path CSV (path,t,S,tau,C,V,phi,G)");
    cmd_hedge->add_flag("--approx-generator", hedge_approx);
    cmd_hedge->add_flag("--json", hedge_json);

    // ---- simulate dump ----
    std::string sim_file, sim_measure = "forward";
    double sim_T = 1.0;
    int sim_regime = 1;
    std::int64_t sim_paths = 10;
    std::uint64_t sim_seed = 0;
    bool sim_json = false, sim_approx = false;
    auto* cmd_sim = app.add_subcommand("simulate", "path debugging utilities");
    auto* cmd_sim_dump = cmd_sim->add_subcommand("dump", "CSV of (path_id, t_k, state)");
    cmd_sim_dump->add_option("file", sim_file)->required();
    cmd_sim_dump->add_option("--measure", sim_measure, "physical|forward|check");
    cmd_sim_dump->add_option("--regime", sim_regime, "starting regime, 1-based");
    cmd_sim_dump->add_option("--T", sim_T)->required();
    cmd_sim_dump->add_option("--paths", sim_paths);
    cmd_sim_dump->add_option("--seed", sim_seed);
    cmd_sim_dump->add_flag("--approx-generator", sim_approx);
    cmd_sim_dump->add_flag("--json", sim_json);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the usage error
        return code == 0 ? 0 : 1;
    }

    if (cmd_check->parsed()) {
        ModelHandle h;
        load(h, check_file, check_approx);
        const int l = rsgbm_model_regimes(h.m);
        const int d = rsgbm_model_assets(h.m);
        std::vector<double> m(l * d), rho(l * d), ell(l), gen(l * l);
        check(rsgbm_model_risk(h.m, m.data(), rho.data(), ell.data()));
        check(rsgbm_model_generator(h.m, gen.data()));
        if (check_json) {
            json out{{"l", l}, {"d", d}};
            for (int i = 0; i < l; ++i) {
                json reg;
                reg["m"] = std::vector<double>(m.begin() + i * d, m.begin() + (i + 1) * d);
                reg["rho"] = std::vector<double>(rho.begin() + i * d, rho.begin() + (i + 1) * d);
                reg["ell"] = ell[i];
                out["regimes"].push_back(reg);
            }
            for (int i = 0; i < l; ++i)
                out["generator"].push_back(
                    std::vector<double>(gen.begin() + i * l, gen.begin() + (i + 1) * l));
            std::printf("%s\n", out.dump(2).c_str());
        } else {
            std::printf("model ok: l=%d d=%d\n", l, d);
            for (int i = 0; i < l; ++i) {
                std::printf("regime %d: m =", i + 1);
                for (int j = 0; j < d; ++j) std::printf(" %.10g", m[i * d + j]);
                std::printf("  rho =");
                for (int j = 0; j < d; ++j) std::printf(" %.10g", rho[i * d + j]);
                std::printf("  ell = %.10g\n", ell[i]);
            }
        }
        return 0;
    }

    if (cmd_dump->parsed()) {
        ModelHandle h;
        load(h, aux_file, aux_approx);
        const int l = rsgbm_model_regimes(h.m);
        const int n = aux_points;
        std::vector<double> t(n), gam(n * l), del(n * l), bet(n * l), tl(n * l), ar(n * l);
        check(rsgbm_aux_curves(h.m, aux_T, n, t.data(), gam.data(), del.data(), bet.data(),
                               tl.data(), ar.data()));
        if (aux_json) {
            json out;
            out["t"] = t;
            for (int i = 0; i < l; ++i) {
                json cols;
                std::vector<double> g(n), dd(n), b(n), tt(n), aa(n);
                for (int k = 0; k < n; ++k) {
                    g[k] = gam[k * l + i]; dd[k] = del[k * l + i]; b[k] = bet[k * l + i];
                    tt[k] = tl[k * l + i]; aa[k] = ar[k * l + i];
                }
                cols["gamma"] = g; cols["delta"] = dd; cols["beta"] = b;
                cols["neg_diag_tilde"] = tt; cols["neg_diag_arrow"] = aa;
                out["regimes"].push_back(cols);
            }
            std::printf("%s\n", out.dump(2).c_str());
        } else {
            std::printf("t");
            for (const char* name : {"gamma", "delta", "beta", "neg_diag_tilde", "neg_diag_arrow"})
                for (int i = 1; i <= l; ++i) std::printf(",%s_%d", name, i);
            std::printf("\n");
            for (int k = 0; k < n; ++k) {
                std::printf("%.10g", t[k]);
                for (const auto* col : {&gam, &del, &bet, &tl, &ar})
                    for (int i = 0; i < l; ++i) std::printf(",%.10g", (*col)[k * l + i]);
                std::printf("\n");
            }
        }
        return 0;
    }

    if (cmd_price->parsed()) {
        ModelHandle h;
        load(h, price_file, price_approx);
        if (price_full) price_n = 500000;
        const int threads = resolve_threads(price_threads);
        const int regime = price_regime - 1;
        double value = 0.0, half = 0.0;
        std::int64_t n_used = 0;
        if (price_method == "mc") {
            const double s0v = price_s0;
            check(rsgbm_price_mc(h.m, payoff_code(price_payoff), price_strike, &s0v, regime,
                                 price_T, price_n, price_seed, threads, &value, &half));
            n_used = price_n;
        } else if (price_method == "fourier") {
            check(rsgbm_price_fourier(h.m, payoff_code(price_payoff), price_strike, price_s0,
                                      regime, price_T, &value, nullptr));
        } else {
            std::fprintf(stderr, "error: unknown method '%s'\n", price_method.c_str());
            return 1;
        }
        if (price_json) {
            json out{{"value", value}, {"half_width", half}, {"n", n_used},
                     {"method", price_method}};
            std::printf("%s\n", out.dump().c_str());
        } else {
            std::printf("%.10g,%.10g,%lld,%s\n", value, half,
                        static_cast<long long>(n_used), price_method.c_str());
        }
        return 0;
    }

    if (cmd_rep->parsed()) {
        TableSpec spec;
        if (rep_table == "shen-table2") {
            spec = {rep_config.empty() ? "configs/shen.toml" : rep_config,
                    {70, 80, 90, 100, 110, 120}, 100.0, 1.0};
        } else if (rep_table == "apple-table8") {
            spec = {rep_config.empty() ? "configs/apple.toml" : rep_config,
                    {128, 129, 130}, 129.95, 20.0 / 252.0};
        } else {
            std::fprintf(stderr, "error: unknown table '%s'\n", rep_table.c_str());
            return 1;
        }
        if (rep_full) rep_pairs = 500000;
        ModelHandle h;
        load(h, spec.config, false);
        const int threads = resolve_threads(rep_threads);
        const int n_regimes = rsgbm_model_regimes(h.m);
        json rows = json::array();
        if (!rep_json)
            std::printf("strike,regime,value,half_width,phi0,phi0_half_width\n");
        for (double strike : spec.strikes) {
            for (int i = 0; i < n_regimes; ++i) {
                double v = 0, vh = 0, dl = 0, dh = 0;
                const double s0v = spec.s0;
                check(rsgbm_price_mc(h.m, RSGBM_PAYOFF_CALL, strike, &s0v, i, spec.horizon,
                                     rep_pairs, rep_seed, threads, &v, &vh));
                check(rsgbm_delta_mc(h.m, RSGBM_PAYOFF_CALL, strike, &s0v, i, spec.horizon,
                                     rep_pairs, rep_seed, threads, &dl, &dh));
                if (rep_json) {
                    rows.push_back({{"strike", strike}, {"regime", i + 1}, {"value", v},
                                    {"half_width", vh}, {"phi0", dl}, {"phi0_half_width", dh}});
                } else {
                    std::printf("%g,%d,%.6f,%.6f,%.6f,%.6f\n", strike, i + 1, v, vh, dl, dh);
                }
            }
        }
        if (rep_json) {
            json out{{"table", rep_table}, {"pairs", rep_pairs}, {"seed", rep_seed},
                     {"rows", rows}};
            std::printf("%s\n", out.dump(2).c_str());
        }
        return 0;
    }

    if (cmd_hedge->parsed()) {
        ModelHandle h;
        load(h, hedge_file, hedge_approx);
        rsgbm_hedge_summary sum;
        const double s0v = hedge_s0;
        check(rsgbm_hedge(h.m, payoff_code(hedge_payoff), hedge_strike, &s0v, hedge_regime - 1,
                          hedge_T, hedge_steps, hedge_paths, hedge_seed,
                          resolve_threads(hedge_threads), hedge_nested ? 1 : 0, hedge_inner,
                          hedge_dump.empty() ? nullptr : hedge_dump.c_str(), &sum));
        if (sum.coarse_fraction > 0.01)
            std::fprintf(stderr,
                         "warning: grid too coarse, %.1f%% of paths have >10 regime jumps inside "
                         "one step\n",
                         100.0 * sum.coarse_fraction);
        json out{{"initial_value", sum.initial_value},
                 {"mean_G_T", sum.mean_g},
                 {"sd_G_T", sum.sd_g},
                 {"ci", sum.ci_half},
                 {"rms_he", sum.rms_hedging_error},
                 {"paths", sum.n_paths},
                 {"steps", sum.n_steps},
                 {"coarse_fraction", sum.coarse_fraction}};
        for (int c = 0; c < sum.n_checkpoints; ++c) {
            out["checkpoints"].push_back({{"t", sum.checkpoint_t[c]},
                                          {"gamma_G_mean", sum.gamma_g_mean[c]},
                                          {"gamma_G_ci", sum.gamma_g_ci[c]},
                                          {"gamma_XG_mean", sum.gamma_xg_mean[c]},
                                          {"gamma_XG_ci", sum.gamma_xg_ci[c]}});
        }
        out["optcont"] = {{"U", sum.window_u}, {"V", sum.window_v},
                          {"mean", sum.covstat_mean}, {"ci", sum.covstat_ci}};
        std::printf("%s\n", out.dump(2).c_str());
        return 0;
    }

    if (cmd_sim_dump->parsed()) {
        ModelHandle h;
        load(h, sim_file, sim_approx);
        const int measure = sim_measure == "physical"  ? RSGBM_MEASURE_PHYSICAL
                            : sim_measure == "check"   ? RSGBM_MEASURE_CHECK
                                                       : RSGBM_MEASURE_FORWARD;
        json rows = json::array();
        if (!sim_json) std::printf("path_id,t_k,state\n");
        std::vector<double> times(4096);
        std::vector<int> states(4096);
        for (std::int64_t p = 0; p < sim_paths; ++p) {
            int n_events = static_cast<int>(times.size());
            check(rsgbm_simulate_path(h.m, measure, sim_regime - 1, sim_T, sim_seed,
                                      static_cast<std::uint64_t>(p), &n_events, times.data(),
                                      states.data()));
            for (int k = 0; k < n_events; ++k) {
                if (sim_json)
                    rows.push_back({{"path_id", p}, {"t_k", times[k]}, {"state", states[k] + 1}});
                else
                    std::printf("%lld,%.10g,%d\n", static_cast<long long>(p), times[k],
                                states[k] + 1);
            }
        }
        if (sim_json) std::printf("%s\n", json{{"rows", rows}}.dump(2).c_str());
        return 0;
    }

    return 0;
}
