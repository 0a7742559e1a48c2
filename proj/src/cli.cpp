#include "phasekit/cli.hpp"

#include "phasekit/config.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/io.hpp"
#include "phasekit/parallel.hpp"
#include "phasekit/phase_sim.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cmath>
#include <tuple>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace phasekit {

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr const char* kConfigHelp = R"(Config file (INI). Paths are relative to the config file.
  model = vdp | memristor | ring3          (required)
  output_dir = .
  [vdp]          mu = 1
  [memristor]    Vdc Rs Cp d0..d5 a0 a1 b2 c2 c4 c6 c8 c10
                 (defaults: shipped illustrative set, Rs = 1000, Cp = 3.5e-9)
  [ring3]        gain = 4, tau = 1e-9
  [injection]    state = model port (vdp: y, memristor: Vm, ring3: v1), gain
  [output]       state = injection state
  [initial]      <state> = value
  [integration]  method = rk4, bootstrap_step = auto, steps_per_period = 2000,
                 settle_periods = 10, max_settle_periods = 500, period_tol = 1e-6,
                 settle_tol = 1e-8, grid_size = 400, period_crossings = 16
  [prc]          n_points = 100, charge = auto, width_periods = 1e-3,
                 mode = state_jump | rect_pulse, discard_periods = 20,
                 crossings = 16, target_rad = 0.05
  [ppv]          harmonics = 16, compare = false, adjoint_min_periods = 10,
                 adjoint_max_periods = 500
  [phasesim]     network, t_end = 0 (use t_end_periods), t_end_periods = 100,
                 dt = 0 (min T0/500), record_every = 1
  [lock]         ppv = adjoint | prc, amp = 0 (Adler half-width 5e-3 omega0),
                 detuning = 0 (relative), horizon_periods = 2000
Environment: PHASEKIT_THREADS caps sweep workers.
Exit codes: 0 ok, 2 configuration or usage error, 3 numerical failure.)";

using Clock = std::chrono::steady_clock;

class Run {
public:
    Run(ExperimentConfig cfg, std::filesystem::path out_dir, std::ostream& log)
        : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)), log_(log), sys_(cfg_.system()),
          port_(cfg_.port()) {
        std::filesystem::create_directories(out_dir_);
    }

    template <class F>
    auto stage(const std::string& name, F&& f) {
        const auto start = Clock::now();
        auto result = f();
        timings_.emplace_back(name, std::chrono::duration<double>(Clock::now() - start).count());
        return result;
    }

    const LimitCycle& cycle() {
        if (!lc_) {
            lc_ = stage("steady", [&] {
                const State x0 = cfg_.initial_state();
                return steady_state(sys_, x0, cfg_.integration.settle_periods, cfg_.bootstrap_step(),
                                    cfg_.cycle_options());
            });
            write_limit_cycle_csv(path("limit_cycle.csv"), *lc_, sys_.state_names);
            log_ << "T0 = " << format_number(lc_->T0) << " s, omega0 = " << format_number(lc_->omega0)
                 << " rad/s, closure = " << format_number(lc_->closure_error) << '\n';
        }
        return *lc_;
    }

    const PrcCurve& prc() {
        if (!prc_) {
            const LimitCycle& lc = cycle();
            const PrcOptions opts = cfg_.prc_options();
            const double h = cfg_.prc.width_periods * lc.T0;
            const double q = cfg_.prc.charge ? *cfg_.prc.charge : stage("charge", [&] {
                return auto_charge(sys_, lc, port_, h, opts, cfg_.prc.target_rad);
            });
            if (!(q > 0.0)) fail(ErrorKind::config, "'prc.charge': must be > 0");
            const ImpulseSpec impulse{h, q / h, port_, cfg_.prc.mode};
            prc_ = stage("prc", [&] { return sweep_prc(sys_, lc, impulse, cfg_.prc.n_points, opts); });
            write_prc_csv(path("prc.csv"), *prc_);
            log_ << "prc: " << prc_->points.size() << " points, q = " << format_number(q)
                 << " C, max |prc| = " << format_number(prc_->max_abs()) << " rad\n";
        }
        return *prc_;
    }

    const PpvCurve& ppv() {
        if (!ppv_) {
            const PrcCurve& curve = prc();
            ppv_ = stage("ppv", [&] { return ppv_from_prc(curve, cfg_.ppv.harmonics); });
            write_ppv_csv(path("ppv.csv"), *ppv_);
        }
        return *ppv_;
    }

    const PpvCurve& adjoint() {
        if (!adjoint_) {
            const LimitCycle& lc = cycle();
            adjoint_ = stage("adjoint", [&] { return adjoint_ppv(sys_, lc, port_, cfg_.adjoint_options()); });
            write_ppv_csv(path("adjoint.csv"), *adjoint_);
        }
        return *adjoint_;
    }

    void compare() {
        const PpvCurve& a = ppv();
        const PpvCurve& b = adjoint();
        const auto [cmp, sa, sb] = stage("compare", [&] {
            return std::tuple{compare_ppv(a, b), sinusoidality_report(a, a.lc), sinusoidality_report(b, b.lc)};
        });
        std::ostringstream os;
        os << "T0_seconds = " << format_number(cycle().T0) << '\n'
           << "omega0_rad_per_s = " << format_number(cycle().omega0) << '\n'
           << "charge_C = " << format_number(prc().impulse.charge()) << '\n'
           << "n_points = " << prc().points.size() << '\n'
           << "prc_max_abs_rad = " << format_number(prc().max_abs()) << '\n'
           << "rms_rel = " << format_number(cmp.rms_rel) << '\n'
           << "max_rel = " << format_number(cmp.max_rel) << '\n'
           << "phase_lag_rad = " << format_number(cmp.phase_lag) << '\n'
           << "output_thd = " << format_number(sb.output_thd) << '\n'
           << "prc_fundamental_fraction = " << format_number(sa.ppv_fundamental_fraction) << '\n'
           << "prc_offset_deg = " << format_number(sa.offset_deg) << '\n'
           << "adjoint_fundamental_fraction = " << format_number(sb.ppv_fundamental_fraction) << '\n'
           << "adjoint_offset_deg = " << format_number(sb.offset_deg) << '\n';
        write_text("compare.txt", os.str());
        log_ << os.str();
    }

    void lock() {
        const PpvCurve& gamma = cfg_.lock.ppv == PpvSource::adjoint ? adjoint() : ppv();
        const auto osc = PhaseOscillator::from_ppv(gamma);
        const double unit = adler_lock_range(gamma, 1.0);
        if (!(unit > 0.0)) fail(ErrorKind::fit, "PPV has no first harmonic; lock range is zero");
        const double amp = cfg_.lock.amp > 0.0 ? cfg_.lock.amp : 5e-3 * osc.omega0 / unit;
        const double w_inj = osc.omega0 * (1.0 + cfg_.lock.detuning);
        const LockReport r = stage("lock", [&] {
            return injection_lock(osc, amp, w_inj, cfg_.lock.horizon_periods);
        });
        std::ostringstream os;
        os << "ppv_source = " << to_string(gamma.source) << '\n'
           << "omega0_rad_per_s = " << format_number(osc.omega0) << '\n'
           << "amp_A = " << format_number(amp) << '\n'
           << "w_inj_rad_per_s = " << format_number(w_inj) << '\n'
           << "detuning_rel = " << format_number(cfg_.lock.detuning) << '\n'
           << "adler_half_width_rad_per_s = " << format_number(unit * amp) << '\n'
           << "locked = " << (r.locked ? "true" : "false") << '\n';
        if (r.steady_phase_deg) os << "steady_phase_deg = " << format_number(*r.steady_phase_deg) << '\n';
        if (r.beat_freq) os << "beat_freq_rad_per_s = " << format_number(*r.beat_freq) << '\n';
        os << "mean_freq_rad_per_s = " << format_number(r.mean_freq) << '\n'
           << "window_freq_error = " << format_number(r.window_freq_error) << '\n';
        write_text("lock.txt", os.str());
        log_ << os.str();
    }

    void phasesim() {
        const auto& ps = cfg_.phasesim;
        if (ps.network.empty()) fail(ErrorKind::config, "'phasesim.network': required for phasesim");
        const auto file = cfg_.resolve(ps.network);
        if (!std::filesystem::exists(file)) {
            fail(ErrorKind::config, "'phasesim.network': file not found: " + file.string());
        }
        const PhaseNetwork net = stage("load_network", [&] {
            return load_network(file, cfg_.base_dir, cfg_.ppv.harmonics);
        });
        double t_end = ps.t_end;
        if (t_end <= 0.0) {
            double longest = 0.0;
            for (const auto& o : net.oscillators) longest = std::max(longest, o.T0());
            t_end = ps.t_end_periods * longest;
        }
        const double dt = ps.dt > 0.0 ? ps.dt : net.default_dt();
        const PhaseTrace trace = stage("phasesim", [&] {
            return simulate_network(net, t_end, dt, ps.record_every);
        });
        write_trace_csv(path("trace.csv"), trace);
        log_ << "phasesim: " << net.oscillators.size() << " oscillators, " << trace.times.size()
             << " samples to t = " << format_number(t_end) << " s\n";
    }

    void write_manifest(const std::string& command) const {
        std::ostringstream os;
        os << "command = " << command << '\n'
           << "phasekit = " << kVersion << '\n'
           << "compiler = " << __VERSION__ << '\n'
           << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
           << "boost = " << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100 << '\n'
           << "cli11 = " << CLI11_VERSION << '\n'
           << "nlohmann_json = " << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
           << NLOHMANN_JSON_VERSION_PATCH << '\n'
           << "threads = " << sweep_threads() << '\n';
        double total = 0.0;
        for (const auto& [name, seconds] : timings_) {
            os << "wall_seconds." << name << " = " << format_number(seconds) << '\n';
            total += seconds;
        }
        os << "wall_seconds.total = " << format_number(total) << '\n'
           << "\n[config]\n" << cfg_.source_text;
        if (!cfg_.source_text.empty() && cfg_.source_text.back() != '\n') os << '\n';
        write_text("run_manifest.txt", os.str());
    }

private:
    [[nodiscard]] std::filesystem::path path(const std::string& name) const { return out_dir_ / name; }

    void write_text(const std::string& name, const std::string& text) const {
        std::ofstream f(path(name), std::ios::binary);
        f << text;
        if (!f) fail(ErrorKind::io, "cannot write " + path(name).string());
    }

    ExperimentConfig cfg_;
    std::filesystem::path out_dir_;
    std::ostream& log_;
    OdeSystem sys_;
    InjectionPort port_;
    std::optional<LimitCycle> lc_;
    std::optional<PrcCurve> prc_;
    std::optional<PpvCurve> ppv_;
    std::optional<PpvCurve> adjoint_;
    std::vector<std::pair<std::string, double>> timings_;
};

struct Flags {
    std::string config;
    std::optional<std::size_t> points;
    std::string output;
    bool compare = false;
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Phase response curves, PPVs and phase-domain oscillator simulation", "phasekit"};
    app.footer(kConfigHelp);
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Flags flags;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"steady", "settle onto the limit cycle; writes limit_cycle.csv"},
        {"prc", "impulse-injection PRC sweep; writes prc.csv"},
        {"ppv", "PPV from the PRC; writes ppv.csv (and compare.txt with --compare)"},
        {"adjoint", "PPV by backward adjoint integration; writes adjoint.csv"},
        {"compare", "PRC-derived PPV against the adjoint PPV; writes compare.txt"},
        {"lock", "single-tone injection locking on the phase model; writes lock.txt"},
        {"phasesim", "phase-domain network simulation; writes trace.csv"},
        {"pipeline", "steady, prc, ppv and compare in sequence"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", flags.config, "experiment config file")->required();
        sub->add_option("-o,--output", flags.output, "output directory (default: output_dir from the config)");
        if (name == "prc" || name == "ppv" || name == "compare" || name == "pipeline" || name == "lock") {
            sub->add_option("-n,--points", flags.points, "PRC sweep points (overrides prc.n_points)")
                ->check(CLI::Range(std::size_t{4}, std::size_t{1000000}));
        }
        if (name == "ppv") sub->add_flag("--compare", flags.compare, "also compute the adjoint and compare");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ExperimentConfig cfg = load_config(flags.config);
        if (flags.points) cfg.prc.n_points = *flags.points;
        const bool want_compare = cfg.ppv.compare || flags.compare;
        const std::filesystem::path out_dir =
            flags.output.empty() ? cfg.resolve(cfg.output_dir) : std::filesystem::path(flags.output);

        Run run(std::move(cfg), out_dir, out);
        if (command == "steady") {
            run.cycle();
        } else if (command == "prc") {
            run.prc();
        } else if (command == "ppv") {
            run.ppv();
            if (want_compare) run.compare();
        } else if (command == "adjoint") {
            run.adjoint();
        } else if (command == "compare" || command == "pipeline") {
            run.compare();
        } else if (command == "lock") {
            run.lock();
        } else if (command == "phasesim") {
            run.phasesim();
        }
        run.write_manifest(command);
        return 0;
    } catch (const Error& e) {
        err << "phasekit " << command << ": " << e.what() << '\n';
        return e.kind() == ErrorKind::config ? 2 : 3;
    } catch (const std::exception& e) {
        err << "phasekit " << command << ": " << e.what() << '\n';
        return 3;
    }
}

int run_command(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

}  // namespace phasekit
