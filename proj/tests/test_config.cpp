#include "catch_amalgamated.hpp"

#include "phasekit/config.hpp"
#include "phasekit/errors.hpp"

#include <filesystem>
#include <string>

using namespace phasekit;
using Catch::Matchers::ContainsSubstring;

namespace {

ErrorKind kind_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("config was accepted: " << text);
    return ErrorKind::argument;
}

std::string message_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal vdp config takes the defaults", "[config]") {
    const auto cfg = parse_config("model = vdp\n[vdp]\nmu = 1\n");
    CHECK(cfg.model == ModelKind::vdp);
    CHECK(cfg.prc.n_points == 100);
    CHECK_FALSE(cfg.prc.charge.has_value());
    CHECK(cfg.prc.mode == ImpulseMode::state_jump);
    CHECK(cfg.integration.method == Method::rk4);
    CHECK(cfg.integration.steps_per_period == 2000);
    CHECK(cfg.ppv.harmonics == 16);
    CHECK(cfg.port().state_index == 1);
    CHECK(cfg.port().gain == 1.0);
    CHECK(cfg.output_index() == 1);
    CHECK(cfg.bootstrap_step() > 0.0);
}

TEST_CASE("values and overrides are read", "[config]") {
    const auto cfg = parse_config(
        "model = vdp\n[vdp]\nmu = 0.25\n[prc]\nn_points = 32\ncharge = 1e-3\nmode = rect_pulse\n"
        "[integration]\nmethod = euler\n[output]\nstate = x\n[injection]\nstate = x\ngain = 2\n"
        "[initial]\nx = 1.5\ny = -0.5\n");
    CHECK(cfg.vdp_mu == 0.25);
    CHECK(cfg.prc.n_points == 32);
    REQUIRE(cfg.prc.charge.has_value());
    CHECK(*cfg.prc.charge == 1e-3);
    CHECK(cfg.prc.mode == ImpulseMode::rect_pulse);
    CHECK(cfg.integration.method == Method::euler);
    CHECK(cfg.output_index() == 0);
    CHECK(cfg.port().state_index == 0);
    CHECK(cfg.port().gain == 2.0);
    const auto x0 = cfg.initial_state();
    REQUIRE(x0.size() == 2);
    CHECK(x0[0] == 1.5);
    CHECK(x0[1] == -0.5);
}

TEST_CASE("invalid values name the offending key", "[config]") {
    const std::string mem = "model = memristor\n[memristor]\nRs = -1\n";
    CHECK(kind_of(mem) == ErrorKind::config);
    CHECK_THAT(message_of(mem), ContainsSubstring("Rs"));
    CHECK_THAT(message_of("model = vdp\n[prc]\nn_points = 3\n"), ContainsSubstring("n_points"));
    CHECK_THAT(message_of("model = vdp\n[prc]\nn_points = 12.5\n"), ContainsSubstring("n_points"));
    CHECK_THAT(message_of("model = vdp\n[prc]\ncharge = -1\n"), ContainsSubstring("charge"));
    CHECK_THAT(message_of("model = vdp\n[vdp]\nmu = abc\n"), ContainsSubstring("mu"));
    CHECK_THAT(message_of("model = vdp\n[prc]\nmode = square\n"), ContainsSubstring("mode"));
    CHECK_THAT(message_of("model = vdp\n[lock]\ndetuning = 0.9\n"), ContainsSubstring("detuning"));
}

TEST_CASE("unknown keys and sections are rejected", "[config]") {
    CHECK_THAT(message_of("model = vdp\n[prc]\nnpoints = 10\n"), ContainsSubstring("npoints"));
    CHECK_THAT(message_of("model = vdp\n[solver]\norder = 4\n"), ContainsSubstring("solver"));
    CHECK_THAT(message_of("model = vdp\ncolour = blue\n"), ContainsSubstring("colour"));
    CHECK(kind_of("model = vdp\n[ring3]\ngain = 4\n") == ErrorKind::config);
    CHECK(kind_of("model = vdp\n[initial]\nz = 1\n") == ErrorKind::config);
    CHECK(kind_of("model = vdp\n[output]\nstate = Vm\n") == ErrorKind::config);
}

TEST_CASE("model is required and must be known", "[config]") {
    CHECK(kind_of("[vdp]\nmu = 1\n") == ErrorKind::config);
    CHECK_THAT(message_of("model = duffing\n"), ContainsSubstring("model"));
}

TEST_CASE("shipped configs load", "[config]") {
    const std::filesystem::path dir = PHASEKIT_CONFIG_DIR;
    for (const char* name : {"vdp.cfg", "ring3.cfg", "memristor_fig4a.cfg", "memristor_fig4c.cfg"}) {
        INFO(name);
        const auto cfg = load_config(dir / name);
        CHECK(cfg.base_dir == dir);
        CHECK_FALSE(cfg.source_text.empty());
    }
    const auto a = load_config(dir / "memristor_fig4a.cfg");
    CHECK(a.model == ModelKind::memristor);
    CHECK(a.memristor.Rs == 1000.0);
    CHECK(a.memristor.Cp == 3.5e-9);
    CHECK(a.port().gain == 1.0 / 3.5e-9);
    const auto c = load_config(dir / "memristor_fig4c.cfg");
    CHECK(c.memristor.Rs == 810.0);
    CHECK(c.prc.discard_periods == 150);
}

TEST_CASE("missing config file is a config error", "[config]") {
    CHECK_THROWS_MATCHES(load_config("/nonexistent/phasekit.cfg"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::config; }));
}

TEST_CASE("relative paths resolve against the config directory", "[config]") {
    const auto cfg = parse_config("model = vdp\n[phasesim]\nnetwork = net.json\n", "/tmp/exp");
    CHECK(cfg.resolve(cfg.phasesim.network) == std::filesystem::path("/tmp/exp/net.json"));
    CHECK(cfg.resolve("/abs/net.json") == std::filesystem::path("/abs/net.json"));
}

TEST_CASE("default memristor parameters validate", "[config]") {
    const auto p = default_memristor_params();
    CHECK_NOTHROW(p.validate());
    CHECK(p.Rs == 1000.0);
    CHECK(p.Cp == 3.5e-9);
}
