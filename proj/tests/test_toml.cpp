#include <doctest.h>

#include "core/config.hpp"
#include "core/toml.hpp"

using namespace rsgbm;

TEST_CASE("toml subset: sections, scalars, arrays, comments") {
    const std::string text = R"(
# header comment
top = 42
[model]
l = 2        # trailing comment
d = 1
name = "two regime"
flag = true
[regime.1]
mu = 0.04
sigma = [[0.4]]
r = 2e-2
[generator]
rows = [[-0.5, 0.5],
        [0.5, -0.5]]  # matrix
)";
    const toml::Table t = toml::parse(text);
    CHECK(t.get("", "top").as_number() == 42);
    CHECK(t.get("model", "l").as_number() == 2);
    CHECK(t.get("model", "name").as_string() == "two regime");
    CHECK(t.get("model", "flag").as_boolean());
    CHECK(t.get("regime.1", "r").as_number() == doctest::Approx(0.02));
    const auto rows = t.get("generator", "rows").as_number_rows();
    CHECK(rows.size() == 2);
    CHECK(rows[1][0] == 0.5);
    CHECK(t.get("regime.1", "mu").as_number_list() == std::vector<double>{0.04});
}

TEST_CASE("toml subset: parse errors carry line context") {
    CHECK_THROWS_AS(toml::parse("[unterminated"), Error);
    CHECK_THROWS_AS(toml::parse("key 42"), Error);
    CHECK_THROWS_AS(toml::parse("a = [1, 2"), Error);
    CHECK_THROWS_AS(toml::parse("a = 1\na = 2"), Error);
    try {
        toml::parse("ok = 1\nbad = zz\n");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("model config rejects structural mistakes") {
    const std::string base = R"(
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
)";
    CHECK_THROWS_AS(load_model_string(base), Error);  // no generator/transition
    CHECK_THROWS_AS(
        load_model_string(base + "[generator]\nrows = [[-0.5, 0.5], [0.5, -0.5]]\n"
                                 "[transition]\nrows = [[1, 0], [0, 1]]\nperiods_per_year = 252\n"),
        Error);  // both present
    const RegimeModel ok =
        load_model_string(base + "[generator]\nrows = [[-0.5, 0.5], [0.5, -0.5]]\n");
    CHECK(ok.regimes == 2);
}

TEST_CASE("transition fallback is gated by the flag") {
    const std::string flip = R"(
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
[transition]
rows = [[0.0, 1.0], [1.0, 0.0]]
periods_per_year = 252
)";
    CHECK_THROWS_AS(load_model_string(flip, false), Error);
    const RegimeModel m = load_model_string(flip, true);
    CHECK(m.generator(0, 1) == doctest::Approx(252.0));
}
