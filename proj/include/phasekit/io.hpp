#pragma once

// CSV emission and ingestion, and the JSON network description read by
// `phasekit phasesim`. Every CSV has a header row; numbers use 17
// significant digits so values round-trip exactly.
//
//   limit_cycle.csv  phase_rad, <state 0>, <state 1>, ...
//   prc.csv          t1_seconds, theta1_rad, prc_rad
//   ppv.csv          theta_rad, gamma_s_per_C, gamma_phase_rad_per_C, source
//   trace.csv        t_seconds, alpha_0_seconds, phase_0_rad, alpha_1_seconds, ...
//
// Network file:
//
//   {
//     "oscillators": [ {"ppv": "out/ppv.csv", "cycle": "out/limit_cycle.csv",
//                       "output": "y", "alpha": 0.0}, ... ],
//     "couplings":   [ {"from": 0, "to": 1, "gain": 1e-3}, ... ],
//     "diffusive":   [ {"a": 0, "b": 1, "gain": 1e-3}, ... ],
//     "injections":  [ {"target": 0, "amp": 1e-3, "omega": 1.0, "phase": 0.0}, ... ]
//   }
//
// Coupling gains are in amperes per output unit; "diffusive" adds
// i_b = gain (v_a - v_b) and i_a = gain (v_b - v_a). Injections are
// amp cos(omega t + phase). Relative paths resolve against base_dir.

#include "phasekit/dynsys.hpp"
#include "phasekit/limit_cycle.hpp"
#include "phasekit/phase_sim.hpp"
#include "phasekit/ppv.hpp"
#include "phasekit/prc.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace phasekit {

/// printf("%.17g").
[[nodiscard]] std::string format_number(double v);

void write_limit_cycle_csv(const std::filesystem::path& path, const LimitCycle& lc,
                           const std::vector<std::string>& state_names);
void write_prc_csv(const std::filesystem::path& path, const PrcCurve& curve);
void write_ppv_csv(const std::filesystem::path& path, const PpvCurve& ppv);
void write_trace_csv(const std::filesystem::path& path, const PhaseTrace& trace);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, std::size_t col) const;
};

[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

/// Rebuilds a cycle from limit_cycle.csv. The output column picks the phase
/// reference; T0 must come from elsewhere (the PPV file).
[[nodiscard]] LimitCycle read_limit_cycle_csv(const std::filesystem::path& path,
                                              const std::string& output_state, double T0);

/// Rebuilds a PPV from ppv.csv and its cycle. omega0 is recovered from the
/// ratio of the two gamma columns.
[[nodiscard]] PpvCurve read_ppv_csv(const std::filesystem::path& ppv_path,
                                    const std::filesystem::path& cycle_path,
                                    const std::string& output_state, std::size_t harmonics = 16);

[[nodiscard]] PhaseNetwork load_network(const std::filesystem::path& path,
                                        const std::filesystem::path& base_dir,
                                        std::size_t harmonics = 16);

}  // namespace phasekit
