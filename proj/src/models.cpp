#include "phasekit/models.hpp"

#include "phasekit/errors.hpp"

#include <cmath>

namespace phasekit {

namespace {

// sum_{i=0..N-1} coef[i] * x^i and its derivative, Horner form.
template <std::size_t N>
std::pair<double, double> horner(const std::array<double, N>& coef, double x) {
    double value = coef[N - 1];
    double slope = 0.0;
    for (std::size_t i = N - 1; i-- > 0;) {
        slope = slope * x + value;
        value = value * x + coef[i];
    }
    return {value, slope};
}

// P(u) = sum_{i=1..5} c_i u^i with u = Vm^2 x, plus dP/du.
std::pair<double, double> cross_terms(const std::array<double, 5>& c, double u) {
    const std::array<double, 6> shifted{0.0, c[0], c[1], c[2], c[3], c[4]};
    return horner(shifted, u);
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) fail(ErrorKind::argument, std::string(name) + " must be finite");
}

}  // namespace

void InjectionPort::validate(std::size_t dim) const {
    require_argument(state_index < dim, "injection.state out of range");
    require_argument(std::isfinite(gain) && gain != 0.0, "injection.gain must be finite and nonzero");
}

void MemristorParams::validate() const {
    require_finite(Vdc, "Vdc");
    require_argument(std::isfinite(Rs) && Rs > 0.0, "Rs must be > 0");
    require_argument(std::isfinite(Cp) && Cp > 0.0, "Cp must be > 0");
    for (double v : d) require_finite(v, "d_i");
    require_finite(a0, "a0");
    require_finite(a1, "a1");
    require_finite(b2, "b2");
    for (double v : c) require_finite(v, "c_2i");
}

std::array<double, 2> memristor_field(std::array<double, 2> state, const MemristorParams& p) {
    const auto [vm, x] = state;
    const double g = horner(p.d, x).first;
    const double v2 = vm * vm;
    const double dvm = (p.Vdc - vm) / (p.Rs * p.Cp) - vm / p.Cp * g;
    const double dx = p.a0 + p.a1 * x + p.b2 * v2 + cross_terms(p.c, v2 * x).first;
    return {dvm, dx};
}

std::array<double, 4> memristor_jacobian(std::array<double, 2> state, const MemristorParams& p) {
    const auto [vm, x] = state;
    const auto [g, dg] = horner(p.d, x);
    const double v2 = vm * vm;
    const double dp = cross_terms(p.c, v2 * x).second;
    return {
        -1.0 / (p.Rs * p.Cp) - g / p.Cp,
        -vm * dg / p.Cp,
        2.0 * p.b2 * vm + dp * 2.0 * vm * x,
        p.a1 + dp * v2,
    };
}

std::array<double, 2> vdp_field(std::array<double, 2> state, double mu) {
    require_argument(mu > 0.0, "van der Pol mu must be > 0");
    const auto [x, y] = state;
    return {y, mu * (1.0 - x * x) * y - x};
}

std::array<double, 4> vdp_jacobian(std::array<double, 2> state, double mu) {
    const auto [x, y] = state;
    return {0.0, 1.0, -2.0 * mu * x * y - 1.0, mu * (1.0 - x * x)};
}

std::array<double, 3> ring3_field(std::array<double, 3> state, double gain, double tau) {
    std::array<double, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        const double prev = state[(k + 2) % 3];
        out[k] = (-state[k] - std::tanh(gain * prev)) / tau;
    }
    return out;
}

OdeSystem make_memristor_system(const MemristorParams& p) {
    p.validate();
    OdeSystem sys;
    sys.dim = 2;
    sys.state_names = {"Vm", "x"};
    sys.field = [p](std::span<const double> s, std::span<double> out) {
        const auto f = memristor_field({s[0], s[1]}, p);
        out[0] = f[0];
        out[1] = f[1];
    };
    sys.jacobian = [p](std::span<const double> s, std::span<double> jac) {
        const auto j = memristor_jacobian({s[0], s[1]}, p);
        std::copy(j.begin(), j.end(), jac.begin());
    };
    sys.params = {{"Vdc", p.Vdc}, {"Rs", p.Rs}, {"Cp", p.Cp}, {"a0", p.a0}, {"a1", p.a1},
                  {"b2", p.b2}};
    for (std::size_t i = 0; i < p.d.size(); ++i) sys.params["d" + std::to_string(i)] = p.d[i];
    for (std::size_t i = 0; i < p.c.size(); ++i) {
        sys.params["c" + std::to_string(2 * (i + 1))] = p.c[i];
    }
    return sys;
}

OdeSystem make_vdp_system(double mu) {
    require_argument(mu > 0.0, "van der Pol mu must be > 0");
    OdeSystem sys;
    sys.dim = 2;
    sys.state_names = {"x", "y"};
    sys.field = [mu](std::span<const double> s, std::span<double> out) {
        out[0] = s[1];
        out[1] = mu * (1.0 - s[0] * s[0]) * s[1] - s[0];
    };
    sys.jacobian = [mu](std::span<const double> s, std::span<double> jac) {
        const auto j = vdp_jacobian({s[0], s[1]}, mu);
        std::copy(j.begin(), j.end(), jac.begin());
    };
    sys.params = {{"mu", mu}};
    return sys;
}

OdeSystem make_ring3_system(double gain, double tau) {
    require_argument(gain > 1.0, "ring3 gain must be > 1");
    require_argument(tau > 0.0, "ring3 tau must be > 0");
    OdeSystem sys;
    sys.dim = 3;
    sys.state_names = {"v1", "v2", "v3"};
    sys.field = [gain, tau](std::span<const double> s, std::span<double> out) {
        const auto f = ring3_field({s[0], s[1], s[2]}, gain, tau);
        std::copy(f.begin(), f.end(), out.begin());
    };
    sys.jacobian = [gain, tau](std::span<const double> s, std::span<double> jac) {
        std::fill(jac.begin(), jac.end(), 0.0);
        for (std::size_t k = 0; k < 3; ++k) {
            const std::size_t prev = (k + 2) % 3;
            const double th = std::tanh(gain * s[prev]);
            jac[k * 3 + k] = -1.0 / tau;
            jac[k * 3 + prev] = -gain * (1.0 - th * th) / tau;
        }
    };
    sys.params = {{"gain", gain}, {"tau", tau}};
    return sys;
}

InjectionPort memristor_port(const MemristorParams& p) {
    return {0, 1.0 / p.Cp};
}

InjectionPort vdp_port() {
    return {1, 1.0};
}

InjectionPort ring3_port(double tau) {
    require_argument(tau > 0.0, "ring3 tau must be > 0");
    return {0, 1.0 / tau};
}

}  // namespace phasekit
