#pragma once

// Autonomous ODE systems, fixed-step Euler/RK4 integration with impulse
// events, and level-crossing detection on recorded trajectories.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace phasekit {

using State = std::vector<double>;

/// Writes f(x) into dxdt. Both spans have length dim.
using FieldFn = std::function<void(std::span<const double> x, std::span<double> dxdt)>;

/// Writes the row-major dim x dim Jacobian df/dx at x into jac.
using JacobianFn = std::function<void(std::span<const double> x, std::span<double> jac)>;

struct OdeSystem {
    std::size_t dim = 0;
    std::vector<std::string> state_names;
    FieldFn field;
    std::map<std::string, double> params;
    /// Optional closed form; empty means "use finite differences".
    JacobianFn jacobian;

    void eval(std::span<const double> x, std::span<double> dxdt) const { field(x, dxdt); }

    /// Closed-form Jacobian when registered, otherwise central differences
    /// with per-component step 1e-6 * max(1, |x_j|).
    void eval_jacobian(std::span<const double> x, std::span<double> jac) const;

    [[nodiscard]] std::size_t state_index(const std::string& name) const;
};

/// Same trajectories traversed `factor` times faster: field multiplied by factor.
[[nodiscard]] OdeSystem time_rescaled(const OdeSystem& sys, double factor);

enum class Method { euler, rk4 };

[[nodiscard]] Method parse_method(const std::string& name);
[[nodiscard]] std::string to_string(Method method);

/// Instantaneous state jump, e.g. a charge q dumped on a capacitor node.
struct ImpulseEvent {
    double at = 0.0;
    State delta;
};

/// Finite-width rectangular injection: adds `rate` to d(state_index)/dt while
/// active. Start and end are snapped to the integration grid, and activity is
/// decided per step, so the delivered integral is rate * (snapped width).
struct RectPulse {
    double start = 0.0;
    double width = 0.0;
    std::size_t state_index = 0;
    double rate = 0.0;
};

struct Trajectory {
    std::size_t dim = 0;
    double step = 0.0;
    std::vector<double> times;
    std::vector<double> states;  // row-major, times.size() x dim

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] std::span<const double> row(std::size_t k) const {
        return {states.data() + k * dim, dim};
    }
    [[nodiscard]] double value(std::size_t k, std::size_t i) const { return states[k * dim + i]; }
    [[nodiscard]] std::vector<double> column(std::size_t i) const;
    [[nodiscard]] State final_state() const;
};

/// Single-step propagator with reusable work buffers. Not thread-safe; make
/// one per thread.
class Stepper {
public:
    Stepper(const OdeSystem& sys, Method method);

    /// Advances x in place by h. `forcing`, when non-empty, is added to the
    /// derivative at every stage.
    void step(std::span<double> x, double h, std::span<const double> forcing = {});

    [[nodiscard]] const OdeSystem& system() const noexcept { return *sys_; }
    [[nodiscard]] Method method() const noexcept { return method_; }

private:
    void deriv(std::span<const double> x, std::span<double> out, std::span<const double> forcing);

    const OdeSystem* sys_;
    Method method_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Fixed-step integration over [t0, t1] recording every grid point. Event
/// and pulse times are snapped to the nearest grid point; each event's delta
/// is applied to the state at that grid point before the outgoing step, and
/// the recorded row holds the post-jump state.
[[nodiscard]] Trajectory integrate(const OdeSystem& sys, std::span<const double> x0, double t0,
                                   double t1, double step, Method method = Method::rk4,
                                   std::span<const ImpulseEvent> events = {},
                                   std::span<const RectPulse> pulses = {});

/// Advances x in place by n_steps without recording. Throws on divergence.
void advance(Stepper& stepper, std::span<double> x, std::size_t n_steps, double step,
             double t_start = 0.0);

enum class Direction { rising, falling };

/// Linear-interpolation roots of values - level between adjacent samples with
/// the requested sign change, in increasing order.
[[nodiscard]] std::vector<double> crossing_times(std::span<const double> times,
                                                 std::span<const double> values, double level,
                                                 Direction direction);

[[nodiscard]] std::vector<double> crossing_times(const Trajectory& traj, std::size_t state_index,
                                                 double level, Direction direction);

struct SectionPoint {
    double time = 0.0;
    State state;
};

/// Locates the crossing of x[index] = level inside one integration step that
/// starts at (left_time, left_state), by bracketed secant iteration on the
/// partial step length. The crossing must be bracketed by the step's ends.
[[nodiscard]] SectionPoint refine_crossing(Stepper& stepper, std::span<const double> left_state,
                                           double left_time, double step, std::size_t index,
                                           double level);

}  // namespace phasekit
