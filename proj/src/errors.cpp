#include "phasekit/errors.hpp"

namespace phasekit {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::argument: return "argument";
        case ErrorKind::divergence: return "divergence";
        case ErrorKind::not_oscillating: return "not-oscillating";
        case ErrorKind::non_convergence: return "non-convergence";
        case ErrorKind::period_unstable: return "period-unstable";
        case ErrorKind::restabilization: return "not-restabilized";
        case ErrorKind::too_strong_impulse: return "too-strong-impulse";
        case ErrorKind::fit: return "fit-error";
        case ErrorKind::orbit_accuracy: return "orbit-accuracy";
        case ErrorKind::non_hyperbolic: return "non-hyperbolic";
        case ErrorKind::incompatible_curves: return "incompatible-curves";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace phasekit
