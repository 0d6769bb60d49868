#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fatou {

enum class ErrorKind {
    NonConvergence,
    ZeroPolynomial,
    NonzeroConstantTerm,
    InsufficientOrder,
    IndeterminatePoint,
    DegreeCapExceeded,
    OrbitMismatch,
    NotParabolic,
    NonDivisible,
    MissingParabolicData,
    VerificationFailed,
    ReconstructionResidualTooLarge,
    QuadratureBudgetExceeded,
    DegeneratePoints,
    UnsupportedDivergence,
    RadiusTooLarge,
    SyntaxError,
    NotRational,
    DegreeTooSmall,
    NotCoprime,
    Usage,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::NonzeroConstantTerm: return "NonzeroConstantTerm";
    case ErrorKind::InsufficientOrder: return "InsufficientOrder";
    case ErrorKind::IndeterminatePoint: return "IndeterminatePoint";
    case ErrorKind::DegreeCapExceeded: return "DegreeCapExceeded";
    case ErrorKind::OrbitMismatch: return "OrbitMismatch";
    case ErrorKind::NotParabolic: return "NotParabolic";
    case ErrorKind::NonDivisible: return "NonDivisible";
    case ErrorKind::MissingParabolicData: return "MissingParabolicData";
    case ErrorKind::VerificationFailed: return "VerificationFailed";
    case ErrorKind::ReconstructionResidualTooLarge: return "ReconstructionResidualTooLarge";
    case ErrorKind::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorKind::DegeneratePoints: return "DegeneratePoints";
    case ErrorKind::UnsupportedDivergence: return "UnsupportedDivergence";
    case ErrorKind::RadiusTooLarge: return "RadiusTooLarge";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::NotRational: return "NotRational";
    case ErrorKind::DegreeTooSmall: return "DegreeTooSmall";
    case ErrorKind::NotCoprime: return "NotCoprime";
    case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

}  // namespace fatou
