#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace semilab {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Failure categories raised by the library. Every throw site uses exactly
/// one of these so callers (and the CLI exit-code mapping) can dispatch on it.
enum class ErrorKind {
    SingularResolvent,
    DimensionMismatch,
    EigenFailure,
    ContourCrossesSpectrum,
    MissingDerivative,
    QuadratureUnderResolved,
    EmptyProbeSet,
    BadEndpoint,
    NotANode,
    PreconditionViolated,
    NonpositiveM,
    DegenerateReMu,
    NeumannDivergence,
    SlowConvergence,
    NotDiagonal,
    ParseError,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::SingularResolvent: return "SingularResolvent";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::ContourCrossesSpectrum: return "ContourCrossesSpectrum";
    case ErrorKind::MissingDerivative: return "MissingDerivative";
    case ErrorKind::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorKind::EmptyProbeSet: return "EmptyProbeSet";
    case ErrorKind::BadEndpoint: return "BadEndpoint";
    case ErrorKind::NotANode: return "NotANode";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NonpositiveM: return "NonpositiveM";
    case ErrorKind::DegenerateReMu: return "DegenerateReMu";
    case ErrorKind::NeumannDivergence: return "NeumannDivergence";
    case ErrorKind::SlowConvergence: return "SlowConvergence";
    case ErrorKind::NotDiagonal: return "NotDiagonal";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) throw Error(kind, what);
}

}  // namespace semilab
