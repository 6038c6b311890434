#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>

#include "core/pricing.hpp"
#include "rsgbm/rsgbm.h"
#include "test_util.hpp"

using namespace testutil;

namespace {

const char* kShenText = R"(
[model]
l = 2
d = 1
[regime.1]
mu = 0.04
sigma = 0.4
r = 0.02
[regime.2]
mu = 0.08
sigma = 0.2
r = 0.04
[generator]
rows = [[-0.5, 0.5], [0.5, -0.5]]
)";

struct Proc {
    int status = -1;
    std::string out;
};

Proc run(const std::string& cmd) {
    Proc p;
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (fgets(buf.data(), buf.size(), pipe)) p.out += buf.data();
    p.status = pclose(pipe);
    return p;
}

std::string cli() { return RSGBM_CLI_PATH; }
std::string cfg(const char* name) { return std::string(RSGBM_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("c api: load, inspect, price, free") {
    rsgbm_model* m = nullptr;
    REQUIRE(rsgbm_model_load_string(kShenText, 0, &m) == RSGBM_OK);
    CHECK(rsgbm_model_regimes(m) == 2);
    CHECK(rsgbm_model_assets(m) == 1);

    double mvals[2], rho[2], ell[2];
    CHECK(rsgbm_model_risk(m, mvals, rho, ell) == RSGBM_OK);
    CHECK(ell[0] == doctest::Approx(0.0025));
    CHECK(ell[1] == doctest::Approx(0.04));

    double value = 0.0, delta = 0.0;
    CHECK(rsgbm_price_fourier(m, RSGBM_PAYOFF_CALL, 100.0, 100.0, 0, 1.0, &value, &delta) ==
          RSGBM_OK);
    CHECK(value == doctest::Approx(15.6360740341).epsilon(1e-5));
    CHECK(delta == doctest::Approx(0.5998761529).epsilon(1e-4));

    const double s0 = 100.0;
    double mc = 0.0, hw = 0.0;
    CHECK(rsgbm_price_mc(m, RSGBM_PAYOFF_CALL, 100.0, &s0, 0, 1.0, 20000, 0, 2, &mc, &hw) ==
          RSGBM_OK);
    CHECK(std::abs(mc - value) < 3.0 * hw / 1.96 + 1e-9);

    double lambda = 0.0;
    CHECK(rsgbm_uniformization_bound(m, RSGBM_GEN_ARROW, 1.0, &lambda) == RSGBM_OK);
    CHECK(lambda == doctest::Approx(0.5185066772618249 * 1.001).epsilon(1e-6));

    rsgbm_model_free(m);
}

TEST_CASE("c api: curves endpoints and bs") {
    rsgbm_model* m = nullptr;
    REQUIRE(rsgbm_model_load_string(kShenText, 0, &m) == RSGBM_OK);
    const int n = 5, l = 2;
    std::vector<double> t(n), beta(n * l);
    CHECK(rsgbm_aux_curves(m, 1.0, n, t.data(), nullptr, nullptr, beta.data(), nullptr,
                           nullptr) == RSGBM_OK);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    CHECK(beta[0] == 1.0);
    CHECK(beta[(n - 1) * l + 0] == doctest::Approx(0.976676578088).epsilon(1e-9));
    rsgbm_model_free(m);

    double price = 0.0, delta = 0.0;
    CHECK(rsgbm_bs_price(129.95, 128.0, 0.2658, 0.0216, 20.0 / 252.0, 1, &price, &delta) ==
          RSGBM_OK);
    CHECK(std::abs(price - 5.0304) < 1e-3);
    CHECK(std::abs(delta - 0.6034) < 1e-3);
}

TEST_CASE("c api: errors set codes and messages") {
    rsgbm_model* m = nullptr;
    CHECK(rsgbm_model_load("/nonexistent/file.toml", 0, &m) == RSGBM_ERR_IO);
    const std::string bad = std::string(kShenText) + "\n";
    std::string broken(bad);
    broken.replace(broken.find("-0.5, 0.5"), 9, "-1.0, 0.5");
    CHECK(rsgbm_model_load_string(broken.c_str(), 0, &m) == RSGBM_ERR_INVALID_MODEL);
    CHECK(std::string(rsgbm_last_error()).find("InvalidGenerator") != std::string::npos);

    double q[4] = {0.0, 1.0, 1.0, 0.0};
    double gen[4];
    CHECK(rsgbm_generator_from_transition(q, 2, 252.0, 0, gen) == RSGBM_ERR_INVALID_MODEL);
    CHECK(rsgbm_generator_from_transition(q, 2, 252.0, 1, gen) == RSGBM_OK);
    CHECK(gen[1] == doctest::Approx(252.0));
}

TEST_CASE("c api: hedge summary smoke") {
    rsgbm_model* m = nullptr;
    REQUIRE(rsgbm_model_load_string(kShenText, 0, &m) == RSGBM_OK);
    rsgbm_hedge_summary sum;
    const double s0 = 100.0;
    REQUIRE(rsgbm_hedge(m, RSGBM_PAYOFF_CALL, 100.0, &s0, 0, 1.0, 20, 200, 0, 2, 0, 0, nullptr,
                        &sum) == RSGBM_OK);
    CHECK(sum.n_paths == 200);
    CHECK(sum.initial_value == doctest::Approx(15.636).epsilon(1e-3));
    CHECK(sum.n_checkpoints == 3);
    CHECK(std::isfinite(sum.rms_hedging_error));
    rsgbm_model_free(m);
}

TEST_CASE("cli: model check output and failure exit code") {
    const Proc ok = run(cli() + " model check " + cfg("shen.toml"));
    CHECK(ok.status == 0);
    CHECK(ok.out.find("ell = 0.0025") != std::string::npos);

    const Proc bad = run(cli() + " model check /nonexistent.toml");
    CHECK(bad.status != 0);
}

TEST_CASE("cli: price one-line csv and bit-identical reruns") {
    const std::string cmd = cli() + " price " + cfg("shen.toml") +
                            " --payoff call --strike 100 --s0 100 --regime 1 --T 1 --method mc "
                            "--n 5000 --seed 3";
    const Proc a = run(cmd);
    const Proc b = run(cmd);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find(",mc") != std::string::npos);

    const Proc f = run(cli() + " price " + cfg("shen.toml") +
                       " --payoff call --strike 100 --s0 100 --regime 1 --T 1 --method fourier");
    CHECK(f.status == 0);
    CHECK(f.out.find("15.636") != std::string::npos);
}

TEST_CASE("cli: auxfn dump emits the documented columns") {
    const Proc p = run(cli() + " auxfn dump " + cfg("shen.toml") + " --T 1 --points 11");
    CHECK(p.status == 0);
    CHECK(p.out.find("t,gamma_1,gamma_2,delta_1,delta_2,beta_1,beta_2,neg_diag_tilde_1") !=
          std::string::npos);
    // 11 rows + header
    int lines = 0;
    for (char c : p.out)
        if (c == '\n') ++lines;
    CHECK(lines == 12);
    CHECK(p.out.find("0.9766765") != std::string::npos);
    CHECK(p.out.find("0.9644082") != std::string::npos);
}

TEST_CASE("cli: reproduce emits one row per strike and regime") {
    const Proc p = run(cli() + " reproduce shen-table2 --pairs 2000 --seed 1 --config " +
                       cfg("shen.toml"));
    CHECK(p.status == 0);
    int lines = 0;
    for (char c : p.out)
        if (c == '\n') ++lines;
    CHECK(lines == 13);  // header + 6 strikes x 2 regimes
    CHECK(p.out.find("strike,regime,value,half_width,phi0,phi0_half_width") != std::string::npos);
}

TEST_CASE("cli: json twins emit the same numbers") {
    const Proc csv = run(cli() + " price " + cfg("shen.toml") +
                         " --payoff call --strike 100 --s0 100 --regime 1 --T 1 --method fourier");
    const Proc js = run(cli() + " price " + cfg("shen.toml") +
                        " --payoff call --strike 100 --s0 100 --regime 1 --T 1 --method fourier "
                        "--json");
    CHECK(js.status == 0);
    const std::string v = csv.out.substr(0, csv.out.find(','));
    CHECK(js.out.find(v.substr(0, 8)) != std::string::npos);
}

TEST_CASE("cli: simulate dump lists candidate times per path") {
    const Proc p = run(cli() + " simulate dump " + cfg("shen.toml") +
                       " --measure forward --regime 1 --T 1 --paths 3 --seed 5");
    CHECK(p.status == 0);
    CHECK(p.out.find("path_id,t_k,state") != std::string::npos);
}
