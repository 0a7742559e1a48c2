#pragma once

// Phase response curve extraction by weak-impulse injection.

#include "phasekit/dynsys.hpp"
#include "phasekit/limit_cycle.hpp"
#include "phasekit/models.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace phasekit {

enum class ImpulseMode { state_jump, rect_pulse };

[[nodiscard]] ImpulseMode parse_impulse_mode(const std::string& name);
[[nodiscard]] std::string to_string(ImpulseMode mode);

/// A rectangular current pulse of width h (s) and height b (A) into `port`.
/// In state_jump mode the whole charge h*b lands instantaneously.
struct ImpulseSpec {
    double h = 0.0;
    double b = 0.0;
    InjectionPort port;
    ImpulseMode mode = ImpulseMode::state_jump;

    [[nodiscard]] double charge() const noexcept { return h * b; }
    void validate(std::size_t dim) const;
};

struct PrcPoint {
    double t1 = 0.0;      // injection time after the section, s
    double theta1 = 0.0;  // omega0 * t1
    double prc = 0.0;     // asymptotic phase shift, rad (advance > 0)
};

struct PrcCurve {
    LimitCycle lc;
    ImpulseSpec impulse;
    std::vector<PrcPoint> points;

    [[nodiscard]] double max_abs() const;
};

struct PrcOptions {
    int discard_periods = 20;
    int crossings = 16;
    double period_tol = 1e-6;
    /// Reject any |prc| > pi/2 as a too-strong impulse.
    bool weak_mode = true;
    /// Worker count; 0 means sweep_threads().
    std::size_t threads = 0;
    /// Minimum integration steps per period for sweeps.
    std::size_t steps_per_period = 2000;
};

/// One point of the PRC: free and injected runs from the section state, the
/// impulse applied at t1 (snapped to lc.step), compared after re-stabilization.
[[nodiscard]] double measure_prc_point(const OdeSystem& sys, const LimitCycle& lc,
                                       const ImpulseSpec& impulse, double t1,
                                       const PrcOptions& opts = {});

/// PRC at t1 = k*T0/n_points for k = 0..n_points-1. Uses an integration step
/// that divides T0/n_points exactly, so no injection time is snapped.
[[nodiscard]] PrcCurve sweep_prc(const OdeSystem& sys, const LimitCycle& lc,
                                 const ImpulseSpec& impulse, std::size_t n_points,
                                 const PrcOptions& opts = {});

struct WeaknessReport {
    bool linear = true;
    double deviation = 0.0;  // max |prc(q) - 2 prc(q/2)| / max |prc(q)|
};

/// Reruns the sweep at half charge and checks prc(q) ~= 2 prc(q/2) pointwise.
[[nodiscard]] WeaknessReport weakness_check(const OdeSystem& sys, const PrcCurve& curve,
                                            const PrcOptions& opts = {}, double rel_tol = 0.05);

/// Pure comparison part of weakness_check, for precomputed curves.
[[nodiscard]] WeaknessReport linearity_report(const PrcCurve& full, const PrcCurve& half,
                                              double rel_tol = 0.05);

/// Picks q so that max|prc| is close to target_rad, from two coarse
/// 8-point probe sweeps.
[[nodiscard]] double auto_charge(const OdeSystem& sys, const LimitCycle& lc,
                                 const InjectionPort& port, double width,
                                 const PrcOptions& opts = {}, double target_rad = 0.05);

}  // namespace phasekit
