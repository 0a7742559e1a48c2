#include "phasekit/config.hpp"

#include "phasekit/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace phasekit {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
    fail(ErrorKind::config, "'" + key + "': " + what);
}

double parse_number(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        config_error(key, "expected a number, got '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) config_error(key, "expected a number, got '" + text + "'");
    if (!std::isfinite(v)) config_error(key, "must be finite");
    return v;
}

long parse_integer(const std::string& key, const std::string& text) {
    const double v = parse_number(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e15) config_error(key, "expected an integer, got '" + text + "'");
    return static_cast<long>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
    if (text == "false" || text == "no" || text == "0" || text == "off") return false;
    config_error(key, "expected true or false, got '" + text + "'");
}

// One INI section with every read key remembered, so leftovers can be
// reported as unknown.
class Section {
public:
    Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

    [[nodiscard]] bool present() const { return tree_ != nullptr; }
    [[nodiscard]] std::string key(const std::string& k) const { return name_.empty() ? k : name_ + "." + k; }

    std::optional<std::string> text(const std::string& k) {
        seen_.insert(k);
        if (!tree_) return std::nullopt;
        const auto child = tree_->get_child_optional(pt::ptree::path_type(k, '\0'));
        if (!child) return std::nullopt;
        return child->data();
    }

    void number(const std::string& k, double& out) {
        if (auto t = text(k)) out = parse_number(key(k), *t);
    }
    void positive(const std::string& k, double& out) {
        number(k, out);
        if (!(out > 0.0)) config_error(key(k), "must be > 0");
    }
    void non_negative(const std::string& k, double& out) {
        number(k, out);
        if (out < 0.0) config_error(key(k), "must be >= 0");
    }
    void integer(const std::string& k, int& out, long lo, long hi) {
        if (auto t = text(k)) {
            const long v = parse_integer(key(k), *t);
            if (v < lo || v > hi) {
                config_error(key(k), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            }
            out = static_cast<int>(v);
        }
    }
    void count(const std::string& k, std::size_t& out, long lo, long hi) {
        int v = static_cast<int>(out);
        integer(k, v, lo, hi);
        out = static_cast<std::size_t>(v);
    }

    void reject_unknown() const {
        if (!tree_) return;
        for (const auto& [k, child] : *tree_) {
            if (!seen_.contains(k)) config_error(key(k), "unknown key");
        }
    }

private:
    std::string name_;
    const pt::ptree* tree_;
    std::set<std::string> seen_;
};

ModelKind parse_model(const std::string& text) {
    if (text == "vdp") return ModelKind::vdp;
    if (text == "memristor") return ModelKind::memristor;
    if (text == "ring3") return ModelKind::ring3;
    config_error("model", "expected vdp, memristor or ring3, got '" + text + "'");
}

template <class F>
auto as_config_error(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        config_error(key, e.detail());
    }
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::vdp: return "vdp";
        case ModelKind::memristor: return "memristor";
        case ModelKind::ring3: return "ring3";
    }
    return "?";
}

MemristorParams default_memristor_params() {
    MemristorParams p;
    p.Rs = 1e3;
    p.Cp = 3.5e-9;
    p.Vdc = 3.3795197051251784;
    p.d = {9.1954598781812159e-05, 1.6824540903398385e-04, 1.6456065372073757e-04, 0.0, 0.0, 0.0};
    p.a0 = 0.0;
    p.a1 = -224814348.53577331;
    p.b2 = 199409.41820481184;
    p.c = {23595984.634953242, 780970.43647192849, -84714.47775206923, 0.0, 0.0};
    return p;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorKind::config, "line " + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentConfig cfg;
    cfg.base_dir = base_dir;
    cfg.source_text = text;
    cfg.memristor = default_memristor_params();

    // Top-level keys have no children; sections do.
    pt::ptree top;
    std::map<std::string, const pt::ptree*> sections;
    for (const auto& [name, child] : tree) {
        if (child.empty()) {
            top.put_child(pt::ptree::path_type(name, '\0'), child);
        } else {
            sections[name] = &child;
        }
    }
    const auto section = [&](const std::string& name) {
        const auto it = sections.find(name);
        return Section(name, it == sections.end() ? nullptr : it->second);
    };

    Section root("", &top);
    const auto model_text = root.text("model");
    if (!model_text) config_error("model", "missing (vdp, memristor or ring3)");
    cfg.model = parse_model(*model_text);
    if (auto t = root.text("output_dir")) cfg.output_dir = *t;
    root.reject_unknown();

    const std::set<std::string> model_sections{"vdp", "memristor", "ring3"};
    for (const auto& [name, tree_ptr] : sections) {
        if (model_sections.contains(name) && name != to_string(cfg.model)) {
            config_error(name, "section does not apply to model " + to_string(cfg.model));
        }
    }

    switch (cfg.model) {
        case ModelKind::vdp: {
            Section s = section("vdp");
            s.positive("mu", cfg.vdp_mu);
            s.reject_unknown();
            break;
        }
        case ModelKind::memristor: {
            Section s = section("memristor");
            auto& p = cfg.memristor;
            s.number("Vdc", p.Vdc);
            s.positive("Rs", p.Rs);
            s.positive("Cp", p.Cp);
            for (std::size_t i = 0; i < p.d.size(); ++i) s.number("d" + std::to_string(i), p.d[i]);
            s.number("a0", p.a0);
            s.number("a1", p.a1);
            s.number("b2", p.b2);
            for (std::size_t i = 0; i < p.c.size(); ++i) s.number("c" + std::to_string(2 * (i + 1)), p.c[i]);
            s.reject_unknown();
            as_config_error("memristor", [&] {
                p.validate();
                return 0;
            });
            break;
        }
        case ModelKind::ring3: {
            Section s = section("ring3");
            s.number("gain", cfg.ring3_gain);
            if (!(cfg.ring3_gain > 1.0)) config_error("ring3.gain", "must be > 1");
            s.positive("tau", cfg.ring3_tau);
            s.reject_unknown();
            break;
        }
    }

    const OdeSystem sys = cfg.system();
    const auto state_known = [&](const std::string& key, const std::string& name) {
        if (std::find(sys.state_names.begin(), sys.state_names.end(), name) == sys.state_names.end()) {
            config_error(key, "unknown state '" + name + "' for model " + to_string(cfg.model));
        }
    };
    {
        Section s = section("injection");
        if (auto t = s.text("state")) {
            state_known("injection.state", *t);
            cfg.injection_state = *t;
        }
        if (auto t = s.text("gain")) {
            const double g = parse_number("injection.gain", *t);
            if (g == 0.0) config_error("injection.gain", "must be nonzero");
            cfg.injection_gain = g;
        }
        s.reject_unknown();
    }
    {
        Section s = section("output");
        if (auto t = s.text("state")) {
            state_known("output.state", *t);
            cfg.output_state = *t;
        }
        s.reject_unknown();
    }
    {
        const auto it = sections.find("initial");
        if (it != sections.end()) {
            for (const auto& [name, child] : *it->second) {
                state_known("initial." + name, name);
                cfg.initial[name] = parse_number("initial." + name, child.data());
            }
        }
    }
    {
        Section s = section("integration");
        auto& in = cfg.integration;
        if (auto t = s.text("method")) {
            in.method = as_config_error("integration.method", [&] { return parse_method(*t); });
        }
        s.non_negative("bootstrap_step", in.bootstrap_step);
        s.count("steps_per_period", in.steps_per_period, 100, 10000000);
        s.integer("settle_periods", in.settle_periods, 1, 1000000);
        s.integer("max_settle_periods", in.max_settle_periods, 1, 1000000);
        s.positive("period_tol", in.period_tol);
        s.positive("settle_tol", in.settle_tol);
        s.count("grid_size", in.grid_size, 8, 1000000);
        s.integer("period_crossings", in.period_crossings, 2, 100000);
        s.reject_unknown();
    }
    {
        Section s = section("prc");
        auto& p = cfg.prc;
        s.count("n_points", p.n_points, 4, 1000000);
        if (auto t = s.text("charge")) {
            if (*t != "auto") {
                const double q = parse_number("prc.charge", *t);
                if (q < 0.0) config_error("prc.charge", "must be >= 0 or auto");
                p.charge = q;
            }
        }
        s.positive("width_periods", p.width_periods);
        if (p.width_periods >= 1.0) config_error("prc.width_periods", "must be < 1");
        if (auto t = s.text("mode")) {
            p.mode = as_config_error("prc.mode", [&] { return parse_impulse_mode(*t); });
        }
        s.integer("discard_periods", p.discard_periods, 0, 1000000);
        s.integer("crossings", p.crossings, 1, 100000);
        s.positive("target_rad", p.target_rad);
        if (p.target_rad >= 1.5) config_error("prc.target_rad", "must be < 1.5");
        s.reject_unknown();
    }
    {
        Section s = section("ppv");
        auto& p = cfg.ppv;
        s.count("harmonics", p.harmonics, 1, 10000);
        if (auto t = s.text("compare")) p.compare = parse_bool("ppv.compare", *t);
        s.integer("adjoint_min_periods", p.adjoint_min_periods, 1, 1000000);
        s.integer("adjoint_max_periods", p.adjoint_max_periods, 1, 1000000);
        if (p.adjoint_max_periods < p.adjoint_min_periods) {
            config_error("ppv.adjoint_max_periods", "must be >= adjoint_min_periods");
        }
        s.reject_unknown();
    }
    {
        Section s = section("phasesim");
        auto& p = cfg.phasesim;
        if (auto t = s.text("network")) p.network = *t;
        s.non_negative("t_end", p.t_end);
        s.positive("t_end_periods", p.t_end_periods);
        s.non_negative("dt", p.dt);
        s.count("record_every", p.record_every, 1, 100000000);
        s.reject_unknown();
    }
    {
        Section s = section("lock");
        auto& l = cfg.lock;
        if (auto t = s.text("ppv")) {
            if (*t == "prc") {
                l.ppv = PpvSource::from_prc;
            } else if (*t == "adjoint") {
                l.ppv = PpvSource::adjoint;
            } else {
                config_error("lock.ppv", "expected prc or adjoint, got '" + *t + "'");
            }
        }
        s.non_negative("amp", l.amp);
        s.number("detuning", l.detuning);
        if (std::abs(l.detuning) >= 0.5) config_error("lock.detuning", "must be within (-0.5, 0.5)");
        s.integer("horizon_periods", l.horizon_periods, 200, 100000000);
        s.reject_unknown();
    }

    const std::set<std::string> known{"vdp",  "memristor", "ring3", "injection", "output",
                                      "initial", "integration", "prc", "ppv", "phasesim", "lock"};
    for (const auto& [name, tree_ptr] : sections) {
        if (!known.contains(name)) config_error(name, "unknown section");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot read config file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    auto dir = path.parent_path();
    if (dir.empty()) dir = ".";
    return parse_config(os.str(), dir);
}

OdeSystem ExperimentConfig::system() const {
    switch (model) {
        case ModelKind::vdp: return make_vdp_system(vdp_mu);
        case ModelKind::memristor: return make_memristor_system(memristor);
        case ModelKind::ring3: return make_ring3_system(ring3_gain, ring3_tau);
    }
    fail(ErrorKind::config, "unknown model");
}

InjectionPort ExperimentConfig::port() const {
    InjectionPort p;
    switch (model) {
        case ModelKind::vdp: p = vdp_port(); break;
        case ModelKind::memristor: p = memristor_port(memristor); break;
        case ModelKind::ring3: p = ring3_port(ring3_tau); break;
    }
    if (injection_state) p.state_index = system().state_index(*injection_state);
    if (injection_gain) p.gain = *injection_gain;
    return p;
}

std::size_t ExperimentConfig::output_index() const {
    if (output_state) return system().state_index(*output_state);
    return port().state_index;
}

State ExperimentConfig::initial_state() const {
    const OdeSystem sys = system();
    State x(sys.dim, 0.0);
    switch (model) {
        case ModelKind::vdp: x = {0.1, 0.0}; break;
        case ModelKind::memristor: x = {0.87 * memristor.Vdc, 0.3}; break;
        case ModelKind::ring3: x = {0.1, 0.0, -0.1}; break;
    }
    for (const auto& [name, value] : initial) x[sys.state_index(name)] = value;
    return x;
}

double ExperimentConfig::bootstrap_step() const {
    if (integration.bootstrap_step > 0.0) return integration.bootstrap_step;
    switch (model) {
        case ModelKind::vdp: return 0.01;
        case ModelKind::memristor: {
            double scale = memristor.Rs * memristor.Cp;
            if (memristor.a1 != 0.0) scale = std::min(scale, 1.0 / std::abs(memristor.a1));
            return scale / 50.0;
        }
        case ModelKind::ring3: return ring3_tau / 100.0;
    }
    return 0.0;
}

CycleOptions ExperimentConfig::cycle_options() const {
    CycleOptions o;
    o.method = integration.method;
    o.output_index = output_index();
    o.period_tol = integration.period_tol;
    o.settle_tol = integration.settle_tol;
    o.max_settle_periods = integration.max_settle_periods;
    o.period_crossings = integration.period_crossings;
    o.grid_size = integration.grid_size;
    o.steps_per_period = integration.steps_per_period;
    return o;
}

PrcOptions ExperimentConfig::prc_options() const {
    PrcOptions o;
    o.discard_periods = prc.discard_periods;
    o.crossings = prc.crossings;
    o.period_tol = integration.period_tol;
    o.steps_per_period = integration.steps_per_period;
    return o;
}

AdjointOptions ExperimentConfig::adjoint_options() const {
    AdjointOptions o;
    o.min_periods = ppv.adjoint_min_periods;
    o.max_periods = ppv.adjoint_max_periods;
    o.harmonics = ppv.harmonics;
    return o;
}

std::filesystem::path ExperimentConfig::resolve(const std::string& relative) const {
    const std::filesystem::path p(relative);
    return p.is_absolute() ? p : base_dir / p;
}

}  // namespace phasekit
