#pragma once

#include <stdexcept>
#include <string>

namespace chirpqfi {

enum class ErrorKind {
    NonConvergence,
    InvalidInterval,
    InvalidArgument,
    GridMismatch,
    EdgeLeakage,
    GridTooNarrow,
    NodeMismatch,
    DegenerateModel,
    VacuumOnly,
    Underflow,
    DivergentMoment,
    DegenerateSeed,
    SingularOutcome,
    AsymmetricPulse,
    ZeroInformation,
    TruncationNotConverged,
    UnknownPreset,
    ConfigError,
    IoError,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::InvalidInterval: return "InvalidInterval";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::EdgeLeakage: return "EdgeLeakage";
        case ErrorKind::GridTooNarrow: return "GridTooNarrow";
        case ErrorKind::NodeMismatch: return "NodeMismatch";
        case ErrorKind::DegenerateModel: return "DegenerateModel";
        case ErrorKind::VacuumOnly: return "VacuumOnly";
        case ErrorKind::Underflow: return "Underflow";
        case ErrorKind::DivergentMoment: return "DivergentMoment";
        case ErrorKind::DegenerateSeed: return "DegenerateSeed";
        case ErrorKind::SingularOutcome: return "SingularOutcome";
        case ErrorKind::AsymmetricPulse: return "AsymmetricPulse";
        case ErrorKind::ZeroInformation: return "ZeroInformation";
        case ErrorKind::TruncationNotConverged: return "TruncationNotConverged";
        case ErrorKind::UnknownPreset: return "UnknownPreset";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

// Every failure raised by the library carries one of the kinds above so that
// callers (tests, the CLI) can branch on the category instead of the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace chirpqfi
