#pragma once

#include <filesystem>
#include <fstream>

#include "nslab/dynamics.hpp"

namespace nslab {

/// Parsed key=value run configuration.
///
/// Grammar: one `key = value` per line, `#` starts a comment, blank lines
/// ignored. Keys:
///   N, scheme (galerkin|mollified), cutoff, m, dt, T,
///   datum (zero|kolmogorov|taylor_green|random), amplitude, seed, slope,
///   sample_every, field_every, snapshots (0|1), eta, agmon_c, blowup_guard,
///   tol_energy, tol_ddn_floor, tol_ddn_c, tol_weak, tol_conv, out
struct RunConfig {
    SolverConfig solver;
    bool write_snapshots = false;
    std::string out_dir = "out";
};

inline RunConfig parse_config_text(const std::string& text) {
    RunConfig rc;
    std::string datum_name = "zero";
    double amplitude = 1.0, slope = -2.0;
    std::uint64_t seed = 1;
    std::vector<std::string> unknown;

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const auto num = [&] {
            try {
                std::size_t pos = 0;
                const double v = std::stod(val, &pos);
                if (pos != val.size()) throw std::invalid_argument(val);
                return v;
            } catch (const std::exception&) {
                throw Error("config key " + key + ": bad numeric value '" + val + "'");
            }
        };
        SolverConfig& s = rc.solver;
        if (key == "N")
            s.resolution = int(num());
        else if (key == "scheme") {
            if (val == "galerkin")
                s.scheme.kind = Scheme::Kind::galerkin;
            else if (val == "mollified")
                s.scheme.kind = Scheme::Kind::mollified;
            else
                throw Error("config key scheme: expected galerkin|mollified, got '" + val + "'");
        } else if (key == "cutoff")
            s.scheme.cutoff = int(num());
        else if (key == "m")
            s.scheme.mollifier_index = int(num());
        else if (key == "dt")
            s.dt = num();
        else if (key == "T")
            s.horizon = num();
        else if (key == "datum")
            datum_name = val;
        else if (key == "amplitude")
            amplitude = num();
        else if (key == "seed")
            seed = std::uint64_t(num());
        else if (key == "slope")
            slope = num();
        else if (key == "sample_every")
            s.sample_every = int(num());
        else if (key == "field_every")
            s.field_every = int(num());
        else if (key == "snapshots")
            rc.write_snapshots = num() != 0.0;
        else if (key == "eta")
            s.eta = num();
        else if (key == "agmon_c")
            s.agmon_c = num();
        else if (key == "blowup_guard")
            s.blowup_guard = num();
        else if (key == "tol_energy")
            s.tol.energy_rel = num();
        else if (key == "tol_ddn_floor")
            s.tol.ddn_floor = num();
        else if (key == "tol_ddn_c")
            s.tol.ddn_c = num();
        else if (key == "tol_weak")
            s.tol.weak = num();
        else if (key == "tol_conv")
            s.tol.conv_rel = num();
        else if (key == "out")
            rc.out_dir = val;
        else
            unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config key(s):";
        for (const auto& k : unknown) msg += " " + k;
        throw Error(msg);
    }
    rc.solver.datum = DatumSpec::parse(datum_name, amplitude, seed, slope);
    // scheme-level validation is deferred to the consuming command: a sweep
    // overrides the cutoff/index per level
    return rc;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Deterministic echo of a configuration (manifest embedding, reproducibility).
inline std::string config_echo(const RunConfig& rc) {
    const auto d = [](double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    const SolverConfig& s = rc.solver;
    std::ostringstream out;
    out << "N = " << s.resolution << "\n";
    out << "scheme = " << (s.scheme.kind == Scheme::Kind::galerkin ? "galerkin" : "mollified")
        << "\n";
    if (s.scheme.kind == Scheme::Kind::galerkin)
        out << "cutoff = " << s.scheme.cutoff << "\n";
    else
        out << "m = " << s.scheme.mollifier_index << "\n";
    out << "dt = " << d(s.dt) << "\n";
    out << "T = " << d(s.horizon) << "\n";
    out << "datum = " << s.datum.name() << "\n";
    out << "amplitude = " << d(s.datum.amplitude) << "\n";
    out << "seed = " << s.datum.seed << "\n";
    out << "slope = " << d(s.datum.slope) << "\n";
    out << "sample_every = " << s.sample_every << "\n";
    out << "field_every = " << s.field_every << "\n";
    out << "snapshots = " << (rc.write_snapshots ? 1 : 0) << "\n";
    out << "eta = " << d(s.eta) << "\n";
    out << "agmon_c = " << d(s.agmon_c) << "\n";
    out << "blowup_guard = " << d(s.blowup_guard) << "\n";
    out << "tol_energy = " << d(s.tol.energy_rel) << "\n";
    out << "tol_ddn_floor = " << d(s.tol.ddn_floor) << "\n";
    out << "tol_ddn_c = " << d(s.tol.ddn_c) << "\n";
    out << "tol_weak = " << d(s.tol.weak) << "\n";
    out << "tol_conv = " << d(s.tol.conv_rel) << "\n";
    return out.str();
}

} // namespace nslab
