#pragma once

#include <stdexcept>
#include <string>

namespace abcd {

enum class ErrorCode {
    NotHamiltonian,
    SignViolation,
    SumViolation,
    ThetaOutOfRange,
    OutsideR0,
    BTooSmall,
    V0OutOfRange,
    KappaOutOfRange,
    BadRange,
    NotOnAcLine,
    EpsOutOfRange,
    WindowOutsideGrid,
    NonFiniteState,
    TooShortTrajectory,
    ConfigError,
    IoError,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::NotHamiltonian: return "NotHamiltonian";
    case ErrorCode::SignViolation: return "SignViolation";
    case ErrorCode::SumViolation: return "SumViolation";
    case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::OutsideR0: return "OutsideR0";
    case ErrorCode::BTooSmall: return "BTooSmall";
    case ErrorCode::V0OutOfRange: return "V0OutOfRange";
    case ErrorCode::KappaOutOfRange: return "KappaOutOfRange";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::NotOnAcLine: return "NotOnAcLine";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::WindowOutsideGrid: return "WindowOutsideGrid";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::TooShortTrajectory: return "TooShortTrajectory";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// process exit status for an error
inline int exit_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::IoError: return 3;
    case ErrorCode::NonFiniteState: return 4;
    default: return 2;
    }
}

} // namespace abcd
