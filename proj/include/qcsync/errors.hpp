#pragma once

#include <stdexcept>
#include <string>

namespace qcsync {

enum class ErrorKind {
    InvalidArgument,
    NumericalDegeneracy,
    InternalConsistency,
    DegenerateInput,
    InsufficientData,
    StepSize,
    Numerical,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::NumericalDegeneracy: return "numerical-degeneracy";
        case ErrorKind::InternalConsistency: return "internal-consistency";
        case ErrorKind::DegenerateInput: return "degenerate-input";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::StepSize: return "step-size";
        case ErrorKind::Numerical: return "numerical";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Input/usage problems as opposed to failures of the numerics.
    bool is_usage_error() const noexcept { return kind_ == ErrorKind::InvalidArgument; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace qcsync
