#pragma once

// Experiment configuration: one INI file per experiment.
//
//   model = vdp | memristor | ring3
//   output_dir = out            ; relative to the config file's directory
//
//   [vdp]          mu
//   [memristor]    Vdc Rs Cp d0..d5 a0 a1 b2 c2 c4 c6 c8 c10
//   [ring3]        gain tau
//   [injection]    state gain
//   [output]       state
//   [initial]      <state name> = value, one per state
//   [integration]  method bootstrap_step steps_per_period settle_periods
//                  max_settle_periods period_tol settle_tol grid_size
//                  period_crossings
//   [prc]          n_points charge width_periods mode discard_periods
//                  crossings target_rad
//   [ppv]          harmonics compare adjoint_min_periods adjoint_max_periods
//   [phasesim]     network t_end t_end_periods dt record_every
//   [lock]         ppv amp detuning horizon_periods
//
// Unknown sections or keys are rejected.

#include "phasekit/dynsys.hpp"
#include "phasekit/limit_cycle.hpp"
#include "phasekit/models.hpp"
#include "phasekit/ppv.hpp"
#include "phasekit/prc.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace phasekit {

enum class ModelKind { vdp, memristor, ring3 };

[[nodiscard]] std::string to_string(ModelKind kind);

struct IntegrationConfig {
    Method method = Method::rk4;
    /// Step used before T0 is known; 0 picks a model-based default.
    double bootstrap_step = 0.0;
    std::size_t steps_per_period = 2000;
    int settle_periods = 10;
    int max_settle_periods = 500;
    double period_tol = 1e-6;
    double settle_tol = 1e-8;
    std::size_t grid_size = 400;
    int period_crossings = 16;
};

struct PrcConfig {
    std::size_t n_points = 100;
    /// Injected charge in coulombs; empty selects it automatically.
    std::optional<double> charge;
    /// Pulse width h as a fraction of T0.
    double width_periods = 1e-3;
    ImpulseMode mode = ImpulseMode::state_jump;
    int discard_periods = 20;
    int crossings = 16;
    double target_rad = 0.05;
};

struct PpvConfig {
    std::size_t harmonics = 16;
    bool compare = false;
    int adjoint_min_periods = 10;
    int adjoint_max_periods = 500;
};

struct PhasesimConfig {
    std::string network;  // path to the network file
    double t_end = 0.0;   // s; 0 means t_end_periods * (longest T0)
    double t_end_periods = 100.0;
    double dt = 0.0;      // s; 0 means min T0 / 500
    std::size_t record_every = 1;
};

struct LockConfig {
    PpvSource ppv = PpvSource::adjoint;
    /// Injection amplitude in A; 0 picks the amplitude whose Adler
    /// half-width is 5e-3 omega0.
    double amp = 0.0;
    /// Relative detuning: w_inj = omega0 (1 + detuning).
    double detuning = 0.0;
    int horizon_periods = 2000;
};

struct ExperimentConfig {
    ModelKind model = ModelKind::vdp;
    double vdp_mu = 1.0;
    MemristorParams memristor;
    double ring3_gain = 4.0;
    double ring3_tau = 1e-9;

    std::optional<std::string> injection_state;
    std::optional<double> injection_gain;
    std::optional<std::string> output_state;
    std::map<std::string, double> initial;

    IntegrationConfig integration;
    PrcConfig prc;
    PpvConfig ppv;
    PhasesimConfig phasesim;
    LockConfig lock;

    std::filesystem::path base_dir = ".";
    std::string output_dir = ".";
    std::string source_text;  // raw file contents, echoed into manifests

    [[nodiscard]] OdeSystem system() const;
    [[nodiscard]] InjectionPort port() const;
    [[nodiscard]] std::size_t output_index() const;
    [[nodiscard]] State initial_state() const;
    [[nodiscard]] double bootstrap_step() const;
    [[nodiscard]] CycleOptions cycle_options() const;
    [[nodiscard]] PrcOptions prc_options() const;
    [[nodiscard]] AdjointOptions adjoint_options() const;
    /// A path from the config resolved against the config's directory.
    [[nodiscard]] std::filesystem::path resolve(const std::string& relative) const;
};

/// Parses and validates; throws Error(config) naming the offending key.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Same as load_config on in-memory text; relative paths resolve against base_dir.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text,
                                            const std::filesystem::path& base_dir = ".");

/// Illustrative memristor coefficients shipped as the model default
/// (Rs = 1 kOhm, Cp = 3500 pF).
[[nodiscard]] MemristorParams default_memristor_params();

}  // namespace phasekit
