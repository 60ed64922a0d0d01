#pragma once

#include <stdexcept>
#include <string>

namespace spdelab {

enum class ErrorKind {
    DimensionMismatch,
    InvalidTime,
    InvalidArgument,
    MissingGrowthTag,
    NotContractive,
    NoConvergence,
    StepUnderflow,
    SolutionMismatch,
    SegmentTooLong,
    InvalidWeights,
    UnknownKey,
    TypeMismatch,
    InvariantViolation,
    MissingSeries,
    Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// what() without the kind prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidTime: return "InvalidTime";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::MissingGrowthTag: return "MissingGrowthTag";
        case ErrorKind::NotContractive: return "NotContractive";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::StepUnderflow: return "StepUnderflow";
        case ErrorKind::SolutionMismatch: return "SolutionMismatch";
        case ErrorKind::SegmentTooLong: return "SegmentTooLong";
        case ErrorKind::InvalidWeights: return "InvalidWeights";
        case ErrorKind::UnknownKey: return "UnknownKey";
        case ErrorKind::TypeMismatch: return "TypeMismatch";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::MissingSeries: return "MissingSeries";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) throw Error(kind, what);
}

}  // namespace spdelab
