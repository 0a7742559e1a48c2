#include "catch_amalgamated.hpp"

#include "phasekit/dynsys.hpp"
#include "phasekit/errors.hpp"

#include <cmath>
#include <numbers>

using namespace phasekit;
using Catch::Approx;

namespace {

OdeSystem decay() {
    OdeSystem sys;
    sys.dim = 1;
    sys.state_names = {"x"};
    sys.field = [](std::span<const double> x, std::span<double> d) { d[0] = -x[0]; };
    return sys;
}

OdeSystem still(std::size_t dim) {
    OdeSystem sys;
    sys.dim = dim;
    for (std::size_t i = 0; i < dim; ++i) sys.state_names.push_back("s" + std::to_string(i));
    sys.field = [](std::span<const double>, std::span<double> d) {
        for (double& v : d) v = 0.0;
    };
    return sys;
}

double decay_error(Method m, double step) {
    const State x0{1.0};
    const auto traj = integrate(decay(), x0, 0.0, 1.0, step, m);
    return std::abs(traj.final_state()[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("zero field keeps the state", "[dynsys]") {
    const State x0{1.0, 2.0};
    const auto traj = integrate(still(2), x0, 0.0, 1.0, 0.1);
    REQUIRE(traj.size() == 11);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        CHECK(traj.value(k, 0) == 1.0);
        CHECK(traj.value(k, 1) == 2.0);
    }
}

TEST_CASE("one rk4 step of exponential decay", "[dynsys]") {
    const State x0{1.0};
    const auto traj = integrate(decay(), x0, 0.0, 0.1, 0.1);
    CHECK(traj.final_state()[0] == Approx(std::exp(-0.1)).margin(1e-6));
}

TEST_CASE("impulse event adds its delta", "[dynsys]") {
    const State x0{1.0};
    const ImpulseEvent ev{0.5, {0.1}};
    const auto traj = integrate(still(1), x0, 0.0, 1.0, 0.01, Method::rk4, {&ev, 1});
    CHECK(traj.final_state()[0] == Approx(1.1).epsilon(1e-15));
}

TEST_CASE("zero impulse leaves the run bit-identical", "[dynsys]") {
    const State x0{0.7};
    const ImpulseEvent ev{0.3, {0.0}};
    const auto a = integrate(decay(), x0, 0.0, 1.0, 0.01);
    const auto b = integrate(decay(), x0, 0.0, 1.0, 0.01, Method::rk4, {&ev, 1});
    CHECK(a.states == b.states);
}

TEST_CASE("grid spacing is uniform", "[dynsys]") {
    const State x0{1.0};
    const auto traj = integrate(decay(), x0, 0.0, 1.0, 1e-3);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        CHECK(traj.times[k] - traj.times[k - 1] == Approx(1e-3).epsilon(1e-9));
    }
}

TEST_CASE("integrator convergence orders", "[dynsys]") {
    for (const auto [method, lo] : {std::pair{Method::euler, 0.9}, std::pair{Method::rk4, 3.5}}) {
        const double e1 = decay_error(method, 0.1);
        const double e2 = decay_error(method, 0.05);
        const double e3 = decay_error(method, 0.025);
        CHECK(std::log2(e1 / e2) >= lo);
        CHECK(std::log2(e2 / e3) >= lo);
    }
}

TEST_CASE("invalid steps and divergence", "[dynsys]") {
    const State x0{1.0};
    CHECK_THROWS_AS(integrate(decay(), x0, 0.0, 1.0, 0.0), Error);
    CHECK_THROWS_AS(integrate(decay(), x0, 1.0, 0.0, 0.1), Error);

    OdeSystem blow;
    blow.dim = 1;
    blow.state_names = {"x"};
    blow.field = [](std::span<const double> x, std::span<double> d) { d[0] = x[0] * x[0]; };
    try {
        (void)integrate(blow, x0, 0.0, 5.0, 0.01);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::divergence);
    }
}

TEST_CASE("crossings of a sampled sine", "[dynsys]") {
    std::vector<double> t;
    std::vector<double> v;
    for (int k = 0; k <= 7000; ++k) {
        t.push_back(k * 1e-3);
        v.push_back(std::sin(t.back()));
    }
    const auto up = crossing_times(t, v, 0.0, Direction::rising);
    REQUIRE(up.size() == 1);
    CHECK(up[0] == Approx(2 * std::numbers::pi).margin(1e-5));
    const auto down = crossing_times(t, v, 0.0, Direction::falling);
    REQUIRE(down.size() == 1);
    CHECK(down[0] == Approx(std::numbers::pi).margin(1e-5));
}

TEST_CASE("crossings of constants and ramps", "[dynsys]") {
    const std::vector<double> t{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> flat(5, 0.3);
    CHECK(crossing_times(t, flat, 0.5, Direction::rising).empty());
    const std::vector<double> ramp{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto c = crossing_times(t, ramp, 0.5, Direction::rising);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == Approx(0.5).margin(1e-12));
}

TEST_CASE("crossings shift with the trajectory", "[dynsys]") {
    std::vector<double> t;
    std::vector<double> ts;
    std::vector<double> v;
    for (int k = 0; k <= 2000; ++k) {
        t.push_back(k * 0.01);
        ts.push_back(k * 0.01 + 3.0);
        v.push_back(std::cos(1.3 * t.back()));
    }
    const auto a = crossing_times(t, v, 0.2, Direction::rising);
    const auto b = crossing_times(ts, v, 0.2, Direction::rising);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] - a[i] == Approx(3.0).margin(1e-9));
}

TEST_CASE("refined section crossing", "[dynsys]") {
    OdeSystem rot;
    rot.dim = 2;
    rot.state_names = {"x", "y"};
    rot.field = [](std::span<const double> x, std::span<double> d) {
        d[0] = -x[1];
        d[1] = x[0];
    };
    Stepper stepper(rot, Method::rk4);
    const double t0 = -0.05;
    const State left{std::cos(t0), std::sin(t0)};
    const auto p = refine_crossing(stepper, left, t0, 0.1, 1, 0.0);
    CHECK(p.time == Approx(0.0).margin(1e-8));
    CHECK(p.state[1] == Approx(0.0).margin(1e-8));
}

TEST_CASE("time rescaling speeds up the flow", "[dynsys]") {
    const auto fast = time_rescaled(decay(), 2.0);
    const State x0{1.0};
    const auto a = integrate(decay(), x0, 0.0, 1.0, 1e-3);
    const auto b = integrate(fast, x0, 0.0, 0.5, 5e-4);
    CHECK(b.final_state()[0] == Approx(a.final_state()[0]).epsilon(1e-10));
}

TEST_CASE("finite difference jacobian", "[dynsys]") {
    OdeSystem sys;
    sys.dim = 2;
    sys.state_names = {"a", "b"};
    sys.field = [](std::span<const double> x, std::span<double> d) {
        d[0] = x[0] * x[1];
        d[1] = std::sin(x[0]);
    };
    const State x{0.4, -1.5};
    std::vector<double> j(4);
    sys.eval_jacobian(x, j);
    CHECK(j[0] == Approx(-1.5).epsilon(1e-8));
    CHECK(j[1] == Approx(0.4).epsilon(1e-8));
    CHECK(j[2] == Approx(std::cos(0.4)).epsilon(1e-8));
    CHECK(j[3] == Approx(0.0).margin(1e-9));
}
