#include "phasekit/io.hpp"

#include "phasekit/errors.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace phasekit {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_limit_cycle_csv(const std::filesystem::path& path, const LimitCycle& lc,
                           const std::vector<std::string>& state_names) {
    require_argument(state_names.size() == lc.dim, "state name count does not match the cycle");
    auto out = open_out(path);
    out << "phase_rad";
    for (const auto& n : state_names) out << ',' << n;
    out << '\n';
    for (std::size_t k = 0; k < lc.grid_size; ++k) {
        out << format_number(lc.grid_theta(k));
        for (double v : lc.orbit_row(k)) out << ',' << format_number(v);
        out << '\n';
    }
    finish(out, path);
}

void write_prc_csv(const std::filesystem::path& path, const PrcCurve& curve) {
    auto out = open_out(path);
    out << "t1_seconds,theta1_rad,prc_rad\n";
    for (const auto& p : curve.points) {
        out << format_number(p.t1) << ',' << format_number(p.theta1) << ',' << format_number(p.prc)
            << '\n';
    }
    finish(out, path);
}

void write_ppv_csv(const std::filesystem::path& path, const PpvCurve& ppv) {
    auto out = open_out(path);
    out << "theta_rad,gamma_s_per_C,gamma_phase_rad_per_C,source\n";
    const std::string source = to_string(ppv.source);
    for (std::size_t k = 0; k < ppv.theta.size(); ++k) {
        out << format_number(ppv.theta[k]) << ',' << format_number(ppv.gamma[k]) << ','
            << format_number(ppv.lc.omega0 * ppv.gamma[k]) << ',' << source << '\n';
    }
    finish(out, path);
}

void write_trace_csv(const std::filesystem::path& path, const PhaseTrace& trace) {
    auto out = open_out(path);
    out << "t_seconds";
    for (std::size_t i = 0; i < trace.count; ++i) {
        out << ",alpha_" << i << "_seconds,phase_" << i << "_rad";
    }
    out << '\n';
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        out << format_number(trace.times[k]);
        for (std::size_t i = 0; i < trace.count; ++i) {
            out << ',' << format_number(trace.alpha(k, i)) << ',' << format_number(trace.phase(k, i));
        }
        out << '\n';
    }
    finish(out, path);
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    fail(ErrorKind::io, "missing CSV column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const std::string& text = rows.at(row).at(col);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        fail(ErrorKind::io, "row " + std::to_string(row + 1) + ", column '" + header.at(col) +
                                "': not a number: '" + text + "'");
    }
    return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot read " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::io, path.string() + " is empty");
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            fail(ErrorKind::io, path.string() + ": row " + std::to_string(table.rows.size() + 1) +
                                    " has " + std::to_string(cells.size()) + " cells, expected " +
                                    std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

LimitCycle read_limit_cycle_csv(const std::filesystem::path& path, const std::string& output_state,
                                double T0) {
    require_argument(T0 > 0.0 && std::isfinite(T0), "T0 must be positive");
    const CsvTable t = read_csv(path);
    if (t.header.size() < 2 || t.header[0] != "phase_rad") {
        fail(ErrorKind::io, path.string() + ": expected phase_rad followed by state columns");
    }
    if (t.rows.size() < 8) fail(ErrorKind::io, path.string() + ": too few orbit samples");

    LimitCycle lc;
    lc.T0 = T0;
    lc.omega0 = 2.0 * std::numbers::pi / T0;
    lc.grid_size = t.rows.size();
    lc.dim = t.header.size() - 1;
    lc.ref_state_index = t.column(output_state) - 1;
    lc.orbit.reserve(lc.grid_size * lc.dim);
    double sum = 0.0;
    for (std::size_t k = 0; k < lc.grid_size; ++k) {
        const double theta = t.number(k, 0);
        if (std::abs(theta - lc.grid_theta(k)) > 1e-9) {
            fail(ErrorKind::io, path.string() + ": phase column is not a uniform grid from 0");
        }
        for (std::size_t j = 0; j < lc.dim; ++j) lc.orbit.push_back(t.number(k, j + 1));
        sum += lc.orbit[k * lc.dim + lc.ref_state_index];
    }
    lc.mean_output = sum / static_cast<double>(lc.grid_size);
    lc.ref_level = lc.mean_output;
    lc.step = T0 / 2000.0;
    return lc;
}

PpvCurve read_ppv_csv(const std::filesystem::path& ppv_path, const std::filesystem::path& cycle_path,
                      const std::string& output_state, std::size_t harmonics) {
    const CsvTable t = read_csv(ppv_path);
    const std::size_t c_theta = t.column("theta_rad");
    const std::size_t c_gamma = t.column("gamma_s_per_C");
    const std::size_t c_phase = t.column("gamma_phase_rad_per_C");
    const std::size_t c_source = t.column("source");
    if (t.rows.size() < 4) fail(ErrorKind::io, ppv_path.string() + ": too few PPV samples");

    std::vector<double> theta;
    std::vector<double> gamma;
    double gg = 0.0;
    double gp = 0.0;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        theta.push_back(t.number(k, c_theta));
        gamma.push_back(t.number(k, c_gamma));
        const double ph = t.number(k, c_phase);
        gg += gamma.back() * gamma.back();
        gp += gamma.back() * ph;
    }
    if (!(gg > 0.0)) fail(ErrorKind::io, ppv_path.string() + ": gamma is identically zero");
    const double omega0 = gp / gg;
    if (!(omega0 > 0.0)) fail(ErrorKind::io, ppv_path.string() + ": cannot recover omega0");

    LimitCycle lc = read_limit_cycle_csv(cycle_path, output_state, 2.0 * std::numbers::pi / omega0);
    InjectionPort port{lc.ref_state_index, 1.0};
    return PpvCurve::from_samples(std::move(lc), port, std::move(theta), std::move(gamma),
                                  parse_ppv_source(t.rows[0][c_source]), harmonics);
}

PhaseNetwork load_network(const std::filesystem::path& path, const std::filesystem::path& base_dir,
                          std::size_t harmonics) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot read network file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io, path.string() + ": " + e.what());
    }
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base_dir / fp;
    };
    const auto index = [&](const nlohmann::json& j, const char* key) -> std::size_t {
        if (!j.contains(key) || !j[key].is_number_unsigned()) {
            fail(ErrorKind::io, path.string() + ": '" + key + "' must be a non-negative integer");
        }
        return j[key].get<std::size_t>();
    };
    const auto real = [&](const nlohmann::json& j, const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) fail(ErrorKind::io, path.string() + ": '" + key + "' must be a number");
        return j[key].get<double>();
    };

    PhaseNetwork net;
    try {
        for (const auto& o : doc.at("oscillators")) {
            auto ppv = read_ppv_csv(resolve(o.at("ppv").get<std::string>()),
                                    resolve(o.at("cycle").get<std::string>()),
                                    o.at("output").get<std::string>(), harmonics);
            net.oscillators.push_back(PhaseOscillator::from_ppv(std::move(ppv), real(o, "alpha", 0.0)));
        }
        if (doc.contains("couplings")) {
            for (const auto& c : doc["couplings"]) {
                const double g = real(c, "gain", 0.0);
                net.couplings.push_back({index(c, "from"), index(c, "to"), linear_kernel(g), g});
            }
        }
        if (doc.contains("diffusive")) {
            for (const auto& c : doc["diffusive"]) {
                const std::size_t a = index(c, "a");
                const std::size_t b = index(c, "b");
                const double g = real(c, "gain", 0.0);
                net.add_diffusive(a, b, g);
                net.add_diffusive(b, a, g);
            }
        }
        if (doc.contains("injections")) {
            for (const auto& c : doc["injections"]) {
                const double amp = real(c, "amp", 0.0);
                const double omega = real(c, "omega", 0.0);
                const double phase = real(c, "phase", 0.0);
                net.injections.push_back(
                    {index(c, "target"), [=](double t) { return amp * std::cos(omega * t + phase); }});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::io, path.string() + ": " + e.what());
    }
    try {
        net.validate();
    } catch (const Error& e) {
        fail(ErrorKind::io, path.string() + ": " + e.detail());
    }
    return net;
}

}  // namespace phasekit
