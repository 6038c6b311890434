#pragma once

#include <stdexcept>
#include <string>

namespace rsgbm {

enum class ErrorCode {
    dimension_mismatch,
    invalid_generator,
    singular_covariance,
    negative_rate,
    non_positive_vol,
    no_valid_generator,
    negative_time,
    multi_asset_unsupported,
    bound_violation,
    quadrature_not_converged,
    missing_gradient,
    pricer_failure,
    parse_error,
    io_error,
    bad_argument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::dimension_mismatch: return "DimensionMismatch";
        case ErrorCode::invalid_generator: return "InvalidGenerator";
        case ErrorCode::singular_covariance: return "SingularCovariance";
        case ErrorCode::negative_rate: return "NegativeRate";
        case ErrorCode::non_positive_vol: return "NonPositiveVol";
        case ErrorCode::no_valid_generator: return "NoValidGenerator";
        case ErrorCode::negative_time: return "NegativeTime";
        case ErrorCode::multi_asset_unsupported: return "MultiAssetUnsupported";
        case ErrorCode::bound_violation: return "BoundViolation";
        case ErrorCode::quadrature_not_converged: return "QuadratureNotConverged";
        case ErrorCode::missing_gradient: return "MissingGradient";
        case ErrorCode::pricer_failure: return "PricerFailure";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::bad_argument: return "BadArgument";
    }
    return "Error";
}

}  // namespace rsgbm
