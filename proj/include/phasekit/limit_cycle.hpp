#pragma once

// Settling onto an attracting periodic orbit, period estimation, orbit
// sampling on a uniform phase grid, and asymptotic phase-shift measurement.
//
// Phase zero is the rising crossing of the output state through its
// one-period time average. Phase advances are positive.

#include "phasekit/dynsys.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace phasekit {

struct CycleOptions {
    Method method = Method::rk4;
    std::size_t output_index = 0;
    double period_tol = 1e-6;      // relative
    double settle_tol = 1e-8;      // relative change of per-cycle peak-to-peak amplitude
    int max_settle_periods = 500;
    int period_crossings = 16;     // K: gaps averaged into T0
    std::size_t grid_size = 400;   // N: orbit samples per period
    std::size_t steps_per_period = 2000;
};

struct LimitCycle {
    double T0 = 0.0;
    double omega0 = 0.0;
    std::size_t grid_size = 0;
    std::size_t dim = 0;
    std::vector<double> orbit;  // grid_size x dim, row k at phase 2*pi*k/grid_size
    std::size_t ref_state_index = 0;
    double ref_level = 0.0;
    double mean_output = 0.0;
    /// Integration step matched to this cycle: T0 / steps_per_period.
    double step = 0.0;
    /// Max relative mismatch between the state one period after row 0 and row 0.
    double closure_error = 0.0;
    /// (max gap - min gap) / T0 over the crossings that produced T0.
    double period_spread = 0.0;
    Method method = Method::rk4;

    [[nodiscard]] std::span<const double> orbit_row(std::size_t k) const {
        return {orbit.data() + k * dim, dim};
    }
    [[nodiscard]] State section_state() const {
        return {orbit.begin(), orbit.begin() + static_cast<std::ptrdiff_t>(dim)};
    }
    [[nodiscard]] double grid_theta(std::size_t k) const;
    /// Output state on the orbit at phase theta, periodic linear interpolation.
    [[nodiscard]] double output_at(double theta) const;
    [[nodiscard]] std::vector<double> output_samples() const;
};

/// Runs until the per-cycle peak-to-peak amplitude of the output stabilizes.
/// Returns the final state (on or near the attractor).
[[nodiscard]] State settle(const OdeSystem& sys, std::span<const double> x0,
                           int settle_periods_hint, double step, const CycleOptions& opts = {});

/// Measures T0 from K refined rising crossings and samples one period of the
/// orbit starting on the section.
[[nodiscard]] LimitCycle find_period(const OdeSystem& sys, std::span<const double> settled,
                                     double step, const CycleOptions& opts = {});

/// settle + find_period at a bootstrap step, then find_period again at
/// T0 / steps_per_period so the returned cycle matches the step used downstream.
[[nodiscard]] LimitCycle steady_state(const OdeSystem& sys, std::span<const double> x0,
                                      int settle_periods_hint, double bootstrap_step,
                                      const CycleOptions& opts = {});

/// State on the cycle `delay` seconds after the section (delay may exceed T0).
[[nodiscard]] State state_after(const OdeSystem& sys, const LimitCycle& lc, double delay);

struct PhaseShiftOptions {
    int crossings = 16;  // K
    double period_tol = 1e-6;
};

/// omega0 * (t_free - t_perturbed) averaged over the last K matched rising
/// crossings, after skipping discard_periods periods from the later of the two
/// trajectory starts. Wrapped to (-pi, pi]; positive means the perturbed run
/// is ahead.
[[nodiscard]] double asymptotic_phase_shift(const Trajectory& free, const Trajectory& perturbed,
                                            const LimitCycle& lc, int discard_periods,
                                            const PhaseShiftOptions& opts = {});

/// Same measurement on precomputed rising-crossing lists.
[[nodiscard]] double asymptotic_phase_shift(std::span<const double> free_crossings,
                                            std::span<const double> perturbed_crossings,
                                            double measure_from, const LimitCycle& lc,
                                            const PhaseShiftOptions& opts = {});

/// Wraps an angle to (-pi, pi].
[[nodiscard]] double wrap_angle(double theta);

}  // namespace phasekit
