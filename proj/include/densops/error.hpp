#pragma once

#include <stdexcept>
#include <string>

namespace densops {

/// Machine-readable failure categories surfaced by the library and the CLI.
enum class ErrorCode {
    SingularWeight,  ///< a weight hits an excluded value (e.g. 0, 1/2, 1, or pλ+q = 0)
    ExcludedParam,   ///< a parameter choice outside the admissible set (not weight-related)
    Order,           ///< operator/symbol order violates a precondition or table bound
    Dim,             ///< dimension mismatch between arguments
    Parse,           ///< malformed textual or JSON input
    Table,           ///< coefficient table missing, invalid, or failed verification
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::SingularWeight: return "E_SINGULAR_WEIGHT";
        case ErrorCode::ExcludedParam: return "E_EXCLUDED_PARAM";
        case ErrorCode::Order: return "E_ORDER";
        case ErrorCode::Dim: return "E_DIM";
        case ErrorCode::Parse: return "E_PARSE";
        case ErrorCode::Table: return "E_TABLE";
    }
    return "E_UNKNOWN";
}

/// Exception carrying an ErrorCode; everything user-triggerable throws this.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    const char* code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

} // namespace densops
