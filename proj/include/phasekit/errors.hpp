#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phasekit {

/// Failure categories surfaced by the numerical modules. The CLI maps
/// `config` to exit code 2 and everything else to exit code 3.
enum class ErrorKind {
    argument,
    divergence,
    not_oscillating,
    non_convergence,
    period_unstable,
    restabilization,
    too_strong_impulse,
    fit,
    orbit_accuracy,
    non_hyperbolic,
    incompatible_curves,
    config,
    io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          detail_(message) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require_argument(bool condition, const std::string& message) {
    if (!condition) {
        fail(ErrorKind::argument, message);
    }
}

}  // namespace phasekit
