#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "core/error.hpp"

namespace rsgbm {

// European payoff of polynomial growth; gradient defined almost everywhere.
struct Payoff {
    enum class Kind { call, put, custom };

    Kind kind = Kind::custom;
    double strike = 0.0;
    int growth_degree = 1;
    std::function<double(const Eigen::VectorXd&)> fn;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;

    static Payoff call(double strike) {
        Payoff p;
        p.kind = Kind::call;
        p.strike = strike;
        return p;
    }

    static Payoff put(double strike) {
        Payoff p;
        p.kind = Kind::put;
        p.strike = strike;
        return p;
    }

    static Payoff custom(std::function<double(const Eigen::VectorXd&)> f,
                         std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g = nullptr,
                         int degree = 1) {
        Payoff p;
        p.fn = std::move(f);
        p.grad = std::move(g);
        p.growth_degree = degree;
        return p;
    }

    double operator()(const Eigen::VectorXd& s) const {
        switch (kind) {
            case Kind::call: return std::max(0.0, s.sum() - strike);  // d=1 in practice
            case Kind::put: return std::max(0.0, strike - s.sum());
            case Kind::custom: return fn(s);
        }
        return 0.0;
    }

    bool has_gradient() const { return kind != Kind::custom || static_cast<bool>(grad); }

    Eigen::VectorXd gradient(const Eigen::VectorXd& s) const {
        switch (kind) {
            case Kind::call:
                return Eigen::VectorXd::Constant(s.size(), s.sum() > strike ? 1.0 : 0.0);
            case Kind::put:
                return Eigen::VectorXd::Constant(s.size(), s.sum() < strike ? -1.0 : 0.0);
            case Kind::custom:
                if (!grad) fail(ErrorCode::missing_gradient, "custom payoff has no gradient");
                return grad(s);
        }
        return {};
    }
};

}  // namespace rsgbm
