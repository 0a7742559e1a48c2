#include "catch_amalgamated.hpp"

#include "phasekit/errors.hpp"
#include "phasekit/limit_cycle.hpp"
#include "phasekit/models.hpp"
#include "phasekit/ppv.hpp"
#include "phasekit/prc.hpp"

#include <cmath>
#include <numbers>

using namespace phasekit;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

LimitCycle vdp_cycle(double mu, const OdeSystem& sys, double bootstrap = 0.01) {
    CycleOptions o;
    o.output_index = 1;
    const State x0{0.1, 0.0};
    return steady_state(sys, x0, 10, bootstrap, o);
}

LimitCycle synthetic_cycle(double omega0) {
    LimitCycle lc;
    lc.omega0 = omega0;
    lc.T0 = 2 * kPi / omega0;
    lc.grid_size = 64;
    lc.dim = 1;
    for (std::size_t k = 0; k < 64; ++k) lc.orbit.push_back(std::sin(2 * kPi * k / 64.0));
    lc.step = lc.T0 / 2000;
    return lc;
}

PrcCurve synthetic_prc(double omega0, double h, double b, const std::function<double(double)>& f) {
    PrcCurve c;
    c.lc = synthetic_cycle(omega0);
    c.impulse = {h, b, InjectionPort{0, 1.0}, ImpulseMode::state_jump};
    for (int k = 0; k < 40; ++k) {
        const double th = 2 * kPi * k / 40.0;
        c.points.push_back({th / omega0, th, f(th)});
    }
    return c;
}

PpvCurve synthetic_ppv(const std::function<double(double)>& f, double omega0 = 1.0) {
    std::vector<double> theta;
    std::vector<double> gamma;
    for (int k = 0; k < 128; ++k) {
        theta.push_back(2 * kPi * k / 128.0);
        gamma.push_back(f(theta.back()));
    }
    return PpvCurve::from_samples(synthetic_cycle(omega0), {0, 1.0}, theta, gamma, PpvSource::adjoint);
}

}  // namespace

TEST_CASE("PRC to PPV arithmetic", "[ppv]") {
    const double w = 2 * kPi * 1e4;
    const auto curve = synthetic_prc(w, 1e-9, 1e-6, [](double) { return 1e-3; });
    const auto ppv = ppv_from_prc(curve);
    for (double g : ppv.gamma) CHECK(g == Approx(1.59155e7).epsilon(1e-5));
    CHECK(ppv.source == PpvSource::from_prc);

    const auto zero = ppv_from_prc(synthetic_prc(w, 1e-9, 1e-6, [](double) { return 0.0; }));
    for (double g : zero.gamma) CHECK(g == 0.0);

    CHECK_THROWS_AS(ppv_from_prc(synthetic_prc(w, 1e-9, 0.0, [](double) { return 0.0; })), Error);
}

TEST_CASE("PRC to PPV is linear", "[ppv]") {
    const auto f = [](double th) { return 0.03 * std::sin(th) + 0.01 * std::cos(2 * th); };
    const auto a = ppv_from_prc(synthetic_prc(3.0, 1e-3, 2.0, f));
    const auto b = ppv_from_prc(synthetic_prc(3.0, 1e-3, 2.0, [&](double th) { return 2.5 * f(th); }));
    for (std::size_t k = 0; k < a.gamma.size(); ++k) CHECK(b.gamma[k] == Approx(2.5 * a.gamma[k]).epsilon(1e-14));
}

TEST_CASE("Fourier form is periodic", "[ppv]") {
    const auto p = synthetic_ppv([](double th) { return std::sin(th) + 0.2 * std::cos(3 * th); });
    for (double th : {0.0, 0.7, 2.0, 5.5}) CHECK(p.eval(th + 2 * kPi) == Approx(p.eval(th)).margin(1e-12));
    CHECK(p.fit_residual() < 1e-10);
}

TEST_CASE("a curve too rough for the harmonic count is a fit error", "[ppv]") {
    try {
        (void)synthetic_ppv([](double th) { return std::fmod(th * 37.0, 1.0) > 0.5 ? 1.0 : -1.0; });
        FAIL("expected a fit error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::fit);
    }
}

TEST_CASE("comparison of constructed curves", "[ppv]") {
    const auto a = synthetic_ppv([](double th) { return std::sin(th) + 0.3 * std::sin(2 * th); });
    const auto same = compare_ppv(a, a);
    CHECK(same.rms_rel == 0.0);
    CHECK(same.phase_lag == 0.0);

    const auto b = synthetic_ppv([](double th) { return std::sin(th - kPi / 2) + 0.3 * std::sin(2 * (th - kPi / 2)); });
    CHECK(compare_ppv(a, b).phase_lag == Approx(kPi / 2).margin(2 * kPi / 512));

    const auto other = synthetic_ppv([](double th) { return std::sin(th); }, 2.0);
    try {
        (void)compare_ppv(a, other);
        FAIL("expected incompatible curves");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::incompatible_curves);
    }
}

TEST_CASE("sinusoidality of constructed curves", "[ppv]") {
    std::vector<double> g;
    std::vector<double> out;
    for (int k = 0; k < 256; ++k) {
        const double th = 2 * kPi * k / 256;
        g.push_back(std::sin(th));
        out.push_back(std::cos(th));
    }
    const auto r = sinusoidality_report(g, out);
    CHECK(r.offset_deg == Approx(90.0).margin(0.1));
    CHECK(r.ppv_fundamental_fraction == Approx(1.0).margin(1e-12));
    CHECK(r.output_thd < 1e-12);
}

TEST_CASE("adjoint normalization holds over the cycle", "[ppv]") {
    const auto sys = make_vdp_system(1.0);
    const auto lc = vdp_cycle(1.0, sys);
    const auto sol = solve_adjoint(sys, lc);
    REQUIRE(sol.normalization.size() == lc.grid_size);
    for (double n : sol.normalization) CHECK(n == Approx(1.0).margin(1e-3));
}

TEST_CASE("near-harmonic van der Pol PPV", "[ppv]") {
    // For small mu the cycle is y = 2 sin(theta) from phase zero, and a unit
    // kick on y shifts time by cos(theta)/2.
    const auto sys = make_vdp_system(0.05);
    const auto lc = vdp_cycle(0.05, sys);
    const auto adj = adjoint_ppv(sys, lc, vdp_port());
    const auto r = sinusoidality_report(adj, lc);
    CHECK(r.ppv_fundamental_fraction >= 0.95);
    CHECK(r.offset_deg == Approx(90.0).margin(5.0));
    double ss = 0.0;
    for (std::size_t k = 0; k < adj.theta.size(); ++k) {
        const double d = adj.gamma[k] - 0.5 * std::cos(adj.theta[k]);
        ss += d * d;
    }
    CHECK(std::sqrt(ss / adj.theta.size()) / 0.5 < 0.05);
}

TEST_CASE("relaxation van der Pol has a non-sinusoidal PPV", "[ppv]") {
    const auto sys = make_vdp_system(5.0);
    const auto lc = vdp_cycle(5.0, sys, 0.005);
    const auto adj = adjoint_ppv(sys, lc, vdp_port());
    CHECK(sinusoidality_report(adj, lc).ppv_fundamental_fraction < 0.95);
}

TEST_CASE("time rescaling halves the PPV", "[ppv]") {
    const auto sys = make_vdp_system(1.0);
    const auto fast = time_rescaled(sys, 2.0);
    const auto lc = vdp_cycle(1.0, sys);
    const auto lc2 = vdp_cycle(1.0, fast, 0.005);
    const auto a = adjoint_ppv(sys, lc, vdp_port());
    const auto b = adjoint_ppv(fast, lc2, vdp_port());
    const double scale = a.max_abs();
    for (std::size_t k = 0; k < a.gamma.size(); ++k) CHECK(b.gamma[k] == Approx(a.gamma[k] / 2).margin(1e-4 * scale));
}

TEST_CASE("PRC-derived PPV matches the adjoint", "[ppv]") {
    const auto sys = make_vdp_system(1.0);
    const auto lc = vdp_cycle(1.0, sys);
    const double h = lc.T0 / 1000;
    const double q = 0.1;
    const auto curve = sweep_prc(sys, lc, {h, q / h, vdp_port(), ImpulseMode::state_jump}, 100);
    const auto from_prc = ppv_from_prc(curve);
    const auto adj = adjoint_ppv(sys, lc, vdp_port());
    const auto cmp = compare_ppv(from_prc, adj);
    CHECK(cmp.rms_rel <= 0.05);
    CHECK(std::abs(cmp.phase_lag) <= 2 * kPi / 100);

    const auto half = sweep_prc(sys, lc, {h, q / (2 * h), vdp_port(), ImpulseMode::state_jump}, 100);
    CHECK(compare_ppv(ppv_from_prc(half), from_prc).rms_rel <= 0.05);
}

TEST_CASE("source names", "[ppv]") {
    CHECK(parse_ppv_source(to_string(PpvSource::adjoint)) == PpvSource::adjoint);
    CHECK(parse_ppv_source(to_string(PpvSource::from_prc)) == PpvSource::from_prc);
    CHECK_THROWS_AS(parse_ppv_source("pxf"), Error);
}
