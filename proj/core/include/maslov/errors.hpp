#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace maslov {

/// Failure categories shared by every module. The command-line front end
/// maps them onto process exit codes.
enum class ErrorKind {
    InvalidDegree,     ///< exterior-algebra degree out of range
    InvalidPoint,      ///< the zero pair (0,0) used as a point of RP^1
    DegenerateFrame,   ///< a frame without full column rank
    NoSuchVector,      ///< inputs are linearly dependent
    Config,            ///< malformed or inconsistent user input
    UndersampledPath,  ///< angle lift impossible within the refinement budget
    NumericalFailure,  ///< integration or orthonormalization broke down
    IndexUndefined,    ///< the path left the Maslov-Arnold space
    DegenerateProblem, ///< no admissible start offset delta exists
    NotApplicable      ///< quantity undefined in the current regime
};

/// Stable lower-case identifier for an error kind (used in JSON output).
std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying an ErrorKind and, when meaningful, the (x, lambda)
/// location at which the problem was detected.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<double> x = std::nullopt,
          std::optional<double> lambda = std::nullopt);

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<double> x() const noexcept { return x_; }
    std::optional<double> lambda() const noexcept { return lambda_; }

private:
    ErrorKind kind_;
    std::optional<double> x_;
    std::optional<double> lambda_;
};

} // namespace maslov
