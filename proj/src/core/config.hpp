#pragma once

#include <string>

#include "core/model.hpp"

namespace rsgbm {

// Model config schema:
//
//   [model]            l = 2, d = 1
//   [regime.N]         mu (scalar or length-d array), sigma (scalar, or d x d rows), r
//   [generator]        rows = [[...], ...]                      (l x l rates)
//   [transition]       rows = [[...], ...], periods_per_year    (row-stochastic Q)
//
// Exactly one of [generator]/[transition] must be present.  When
// allow_approx_generator is set, a transition matrix whose principal log is
// not a valid generator falls back to periods*(Q-I).
RegimeModel load_model(const std::string& path, bool allow_approx_generator = false);
RegimeModel load_model_string(const std::string& toml_text, bool allow_approx_generator = false);

}  // namespace rsgbm
