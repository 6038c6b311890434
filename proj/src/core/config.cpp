#include "core/config.hpp"

#include <cmath>

#include "core/toml.hpp"

namespace rsgbm {

namespace {

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows,
                               const std::string& what) {
    if (rows.empty()) fail(ErrorCode::parse_error, what + ": empty matrix");
    const auto n = rows.size();
    const auto m = rows.front().size();
    Eigen::MatrixXd out(n, m);
    for (size_t i = 0; i < n; ++i) {
        if (rows[i].size() != m) fail(ErrorCode::parse_error, what + ": ragged rows");
        for (size_t j = 0; j < m; ++j) out(i, j) = rows[i][j];
    }
    return out;
}

RegimeModel from_table(const toml::Table& t, bool allow_approx_generator) {
    RegimeModel m;
    m.regimes = static_cast<int>(t.get("model", "l").as_number());
    m.assets = static_cast<int>(t.get("model", "d").as_number());
    if (m.regimes < 1 || m.assets < 1)
        fail(ErrorCode::parse_error, "[model] l and d must be positive integers");

    m.mu.resize(m.regimes);
    m.sigma.resize(m.regimes);
    m.rate.resize(m.regimes);
    for (int i = 0; i < m.regimes; ++i) {
        const std::string sec = "regime." + std::to_string(i + 1);
        if (!t.has_section(sec)) fail(ErrorCode::parse_error, "missing section [" + sec + "]");
        const auto mu_list = t.get(sec, "mu").as_number_list();
        m.mu[i] = Eigen::Map<const Eigen::VectorXd>(mu_list.data(), mu_list.size());
        m.sigma[i] = rows_to_matrix(t.get(sec, "sigma").as_number_rows(), sec + ".sigma");
        m.rate[i] = t.get(sec, "r").as_number();
    }

    const bool has_gen = t.has_section("generator");
    const bool has_trans = t.has_section("transition");
    if (has_gen == has_trans)
        fail(ErrorCode::parse_error, "exactly one of [generator] or [transition] is required");
    if (has_gen) {
        m.generator = rows_to_matrix(t.get("generator", "rows").as_number_rows(), "generator.rows");
    } else {
        const Eigen::MatrixXd q =
            rows_to_matrix(t.get("transition", "rows").as_number_rows(), "transition.rows");
        const double periods = t.get("transition", "periods_per_year").as_number();
        if (allow_approx_generator) {
            try {
                m.generator = generator_from_transition(q, periods);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::no_valid_generator) throw;
                m.generator = generator_approximation(q, periods);
            }
        } else {
            m.generator = generator_from_transition(q, periods);
        }
    }
    return validate_model(std::move(m));
}

}  // namespace

RegimeModel load_model(const std::string& path, bool allow_approx_generator) {
    return from_table(toml::parse_file(path), allow_approx_generator);
}

RegimeModel load_model_string(const std::string& text, bool allow_approx_generator) {
    return from_table(toml::parse(text), allow_approx_generator);
}

}  // namespace rsgbm
