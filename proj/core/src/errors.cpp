#include "maslov/errors.hpp"

namespace maslov {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidDegree: return "invalid-degree";
    case ErrorKind::InvalidPoint: return "invalid-point";
    case ErrorKind::DegenerateFrame: return "degenerate-frame";
    case ErrorKind::NoSuchVector: return "no-such-vector";
    case ErrorKind::Config: return "config";
    case ErrorKind::UndersampledPath: return "undersampled-path";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::IndexUndefined: return "index-undefined";
    case ErrorKind::DegenerateProblem: return "degenerate-problem";
    case ErrorKind::NotApplicable: return "not-applicable";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<double> x, std::optional<double> lambda)
    : std::runtime_error(message), kind_(kind), x_(x), lambda_(lambda) {}

} // namespace maslov
