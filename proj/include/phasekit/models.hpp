#pragma once

// Concrete oscillators: the polynomial memristor oscillator, van der Pol,
// and a three-stage tanh ring oscillator.

#include "phasekit/dynsys.hpp"

#include <array>
#include <cstddef>
#include <string>

namespace phasekit {

/// Where injected current enters an oscillator: d(state_index)/dt gains
/// `gain * current`, so a charge q shifts that state by q * gain.
struct InjectionPort {
    std::size_t state_index = 0;
    double gain = 1.0;  // state units per coulomb

    void validate(std::size_t dim) const;
};

/// Memristor oscillator: series Rs from Vdc into node Vm, Cp from Vm to
/// ground, memristor conductance G(x) = sum d_i x^i across Cp.
///
///   dVm/dt = (Vdc - Vm)/(Rs Cp) - (Vm/Cp) G(x)
///   dx/dt  = a0 + a1 x + b2 Vm^2 + sum_{i=1..5} c_{2i} Vm^{2i} x^i
struct MemristorParams {
    double Vdc = 0.0;
    double Rs = 1.0;
    double Cp = 1.0;
    std::array<double, 6> d{};  // d0..d5
    double a0 = 0.0;
    double a1 = 0.0;
    double b2 = 0.0;
    std::array<double, 5> c{};  // c2, c4, c6, c8, c10

    void validate() const;
};

[[nodiscard]] std::array<double, 2> memristor_field(std::array<double, 2> state,
                                                    const MemristorParams& p);
[[nodiscard]] std::array<double, 4> memristor_jacobian(std::array<double, 2> state,
                                                       const MemristorParams& p);

[[nodiscard]] std::array<double, 2> vdp_field(std::array<double, 2> state, double mu);
[[nodiscard]] std::array<double, 4> vdp_jacobian(std::array<double, 2> state, double mu);

[[nodiscard]] std::array<double, 3> ring3_field(std::array<double, 3> state, double gain,
                                                double tau);

[[nodiscard]] OdeSystem make_memristor_system(const MemristorParams& p);
[[nodiscard]] OdeSystem make_vdp_system(double mu);
[[nodiscard]] OdeSystem make_ring3_system(double gain, double tau);

/// Port into the memristor output node: 1/Cp volts per coulomb on Vm.
[[nodiscard]] InjectionPort memristor_port(const MemristorParams& p);

/// Port on y = dx/dt with unit gain, the classical forced van der Pol
/// x'' - mu (1 - x^2) x' + x = i(t). y is also the default output.
[[nodiscard]] InjectionPort vdp_port();

/// Port on v1 for a node of unit resistance: 1/tau volts per coulomb.
[[nodiscard]] InjectionPort ring3_port(double tau);

}  // namespace phasekit
