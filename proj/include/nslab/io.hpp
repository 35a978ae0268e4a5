#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nslab/convergence.hpp"
#include "nslab/epochs.hpp"

namespace nslab {
namespace io {

/// Full-precision float formatting (17 significant digits, round-trip safe).
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// JSON scalar: finite doubles at full precision, NaN/Inf as null.
inline std::string json_number(double x) { return std::isfinite(x) ? fmt(x) : "null"; }

/// Write-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

inline constexpr const char* trajectory_header = "t,l2,dirichlet,laplacian_l2,sup,vt_l2";
inline constexpr const char* aux_header = "t,sup_l1,d2_l2,cum_dissipation";

inline std::string trajectory_csv(const Trajectory& traj) {
    std::string s = trajectory_header;
    s += '\n';
    for (const auto& r : traj.samples) {
        s += fmt(r.t) + ',' + fmt(r.norms.l2) + ',' + fmt(r.norms.dirichlet) + ',' +
             fmt(r.norms.laplacian_l2) + ',' + fmt(r.norms.sup) + ',' + fmt(r.norms.vt_l2) + '\n';
    }
    return s;
}

/// Sidecar with the certified sup bound and the solver-exact dissipation
/// integral; the pinned trajectory header has no room for either.
inline std::string trajectory_aux_csv(const Trajectory& traj) {
    std::string s = aux_header;
    s += '\n';
    for (const auto& r : traj.samples)
        s += fmt(r.t) + ',' + fmt(r.norms.sup_l1) + ',' + fmt(r.norms.d2_l2) + ',' +
             fmt(r.cum_dissipation) + '\n';
    return s;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else
            cur += c;
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        throw Error("parse error in " + context + ": bad number '" + s + "'");
    }
}

} // namespace detail

/// Load a trajectory from its CSV (plus the aux sidecar when present).
/// Norm bundles only; field snapshots are separate artifacts.
inline Trajectory load_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trajectory " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != trajectory_header)
        throw Error("parse error in " + path.string() + ": missing header '" +
                    trajectory_header + "'");
    Trajectory traj;
    traj.has_exact_dissipation = false;
    double prev_t = -std::numeric_limits<double>::infinity();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != 6)
            throw Error("parse error in " + path.string() + ": line " + std::to_string(lineno) +
                        " has " + std::to_string(cells.size()) + " columns, expected 6");
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        TrajectorySample s;
        s.t = detail::parse_double(cells[0], ctx);
        if (!(s.t > prev_t))
            throw Error("parse error in " + path.string() + ": non-monotone t at line " +
                        std::to_string(lineno));
        prev_t = s.t;
        s.norms.t = s.t;
        s.norms.l2 = detail::parse_double(cells[1], ctx);
        s.norms.dirichlet = detail::parse_double(cells[2], ctx);
        s.norms.laplacian_l2 = detail::parse_double(cells[3], ctx);
        s.norms.d2_l2 = s.norms.laplacian_l2;
        s.norms.sup = detail::parse_double(cells[4], ctx);
        s.norms.vt_l2 = detail::parse_double(cells[5], ctx);
        traj.samples.push_back(s);
    }
    if (traj.samples.empty()) throw Error("parse error in " + path.string() + ": no samples");

    const std::filesystem::path aux =
        path.parent_path() / (path.stem().string() + "_aux" + path.extension().string());
    if (std::filesystem::exists(aux)) {
        std::ifstream ain(aux);
        std::string aline;
        if (std::getline(ain, aline) && aline == aux_header) {
            std::size_t i = 0;
            bool all = true;
            while (std::getline(ain, aline) && i < traj.samples.size()) {
                if (aline.empty()) continue;
                const auto cells = detail::split(aline, ',');
                if (cells.size() != 4) break;
                traj.samples[i].norms.sup_l1 = detail::parse_double(cells[1], aux.string());
                traj.samples[i].norms.d2_l2 = detail::parse_double(cells[2], aux.string());
                traj.samples[i].cum_dissipation = detail::parse_double(cells[3], aux.string());
                all = all && std::isfinite(traj.samples[i].cum_dissipation);
                ++i;
            }
            traj.has_exact_dissipation = all && i == traj.samples.size();
        }
    }
    if (traj.samples.size() >= 2)
        traj.config.dt = traj.samples[1].t - traj.samples[0].t;
    traj.config.horizon = traj.samples.back().t;
    return traj;
}

/// Field snapshot: textual container, stable across versions.
///   ns-lab-field 1
///   n <N> t <time> scheme <tag>
///   k1 k2 k3 re1 im1 re2 im2 re3 im3   (nonzero modes, lexicographic in k)
inline std::string snapshot_text(const SpectralField& f, double t, const std::string& scheme_tag) {
    std::string s = "ns-lab-field 1\n";
    s += "n " + std::to_string(f.n) + " t " + fmt(t) + " scheme " + scheme_tag + "\n";
    const int half = f.n / 2;
    for (int k1 = -half + 1; k1 <= half; ++k1)
        for (int k2 = -half + 1; k2 <= half; ++k2)
            for (int k3 = -half + 1; k3 <= half; ++k3) {
                const Vec3c c = f.coeff(k1, k2, k3);
                if (c[0] == Complex(0.0, 0.0) && c[1] == Complex(0.0, 0.0) &&
                    c[2] == Complex(0.0, 0.0))
                    continue;
                s += std::to_string(k1) + ' ' + std::to_string(k2) + ' ' + std::to_string(k3);
                for (int comp = 0; comp < 3; ++comp)
                    s += ' ' + fmt(c[comp].real()) + ' ' + fmt(c[comp].imag());
                s += '\n';
            }
    return s;
}

struct Snapshot {
    SpectralField field;
    double t = 0.0;
    std::string scheme_tag;
};

inline Snapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open snapshot " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "ns-lab-field" || version != 1)
        throw Error("parse error in " + path.string() + ": not a ns-lab field snapshot");
    std::string key;
    int n = 0;
    Snapshot snap;
    in >> key >> n >> key >> snap.t >> key >> snap.scheme_tag;
    snap.field = SpectralField(n);
    int k1, k2, k3;
    double re[3], im[3];
    while (in >> k1 >> k2 >> k3 >> re[0] >> im[0] >> re[1] >> im[1] >> re[2] >> im[2])
        snap.field.set_coeff(k1, k2, k3, {Complex(re[0], im[0]), Complex(re[1], im[1]),
                                          Complex(re[2], im[2])});
    return snap;
}

inline std::string inequality_series_csv(const InequalityReport& rep) {
    std::string s = "t,lhs,rhs\n";
    for (const auto& p : rep.series)
        s += fmt(p.t) + ',' + fmt(p.lhs) + ',' + fmt(p.rhs) + '\n';
    return s;
}

/// Verification report per check: {name, pass, tolerance, max_violation, series_file}.
inline std::string inequality_json(const InequalityReport& rep, const std::string& series_file) {
    std::string s = "{\n";
    s += "  \"name\": \"" + rep.name + "\",\n";
    s += "  \"pass\": " + std::string(rep.pass ? "true" : "false") + ",\n";
    s += "  \"applicable\": " + std::string(rep.applicable ? "true" : "false") + ",\n";
    s += "  \"tolerance\": " + json_number(rep.tolerance) + ",\n";
    s += "  \"max_violation\": " + json_number(rep.max_violation) + ",\n";
    s += "  \"hard_failure\": " + std::string(rep.hard_failure() ? "true" : "false") + ",\n";
    s += "  \"note\": \"" + rep.note + "\",\n";
    s += "  \"series_file\": \"" + series_file + "\"\n";
    s += "}\n";
    return s;
}

inline std::string epoch_report_json(const EpochReport& rep) {
    std::string s = "{\n";
    s += "  \"eta\": " + json_number(rep.eta) + ",\n";
    s += "  \"theta\": " + json_number(rep.theta) + ",\n";
    s += "  \"t_m\": " + (rep.t_m ? json_number(*rep.t_m) : std::string("null")) + ",\n";
    s += "  \"c\": " + json_number(rep.c) + ",\n";
    s += "  \"global_bound\": {\"applicable\": " +
         std::string(rep.global_bound.applicable ? "true" : "false") +
         ", \"holds\": " + std::string(rep.global_bound.holds ? "true" : "false") +
         ", \"value\": " + json_number(rep.global_bound.value) + "},\n";
    s += "  \"epochs\": [\n";
    for (std::size_t i = 0; i < rep.epochs.size(); ++i) {
        const Epoch& e = rep.epochs[i];
        s += "    {\"start\": " + json_number(e.start) + ", \"end\": " + json_number(e.end) +
             ", \"seed\": " + json_number(e.seed) +
             ", \"integral_laplacian\": " + json_number(e.integral_laplacian) +
             ", \"integral_vt\": " + json_number(e.integral_vt) + "}";
        s += (i + 1 < rep.epochs.size() ? ",\n" : "\n");
    }
    s += "  ],\n";
    s += "  \"uncovered_measure\": " + json_number(rep.uncovered_measure) + "\n";
    s += "}\n";
    return s;
}

inline std::string epoch_table(const EpochReport& rep) {
    std::ostringstream out;
    out << "eta = " << fmt(rep.eta) << ", theta = " << fmt(rep.theta);
    if (rep.t_m) out << ", t_m = " << fmt(*rep.t_m);
    out << "\n";
    out << "global bound: "
        << (rep.global_bound.applicable ? (rep.global_bound.holds ? "holds" : "violated")
                                        : "not applicable");
    if (std::isfinite(rep.global_bound.value)) out << " (value " << fmt(rep.global_bound.value) << ")";
    out << "\n";
    out << "epochs (" << rep.epochs.size() << "):\n";
    for (const auto& e : rep.epochs) {
        out << "  (" << fmt(e.start) << ", " << fmt(e.end) << "]  seed " << fmt(e.seed);
        if (std::isfinite(e.integral_laplacian))
            out << "  int||PDv||^2 = " << fmt(e.integral_laplacian)
                << "  int||v_t||^2 = " << fmt(e.integral_vt);
        out << "\n";
    }
    out << "uncovered measure: " << fmt(rep.uncovered_measure) << "\n";
    return out.str();
}

inline std::string convergence_json(const ConvergenceReport& rep) {
    std::string s = "{\n  \"levels\": [";
    for (std::size_t i = 0; i < rep.levels.size(); ++i)
        s += std::to_string(rep.levels[i]) + (i + 1 < rep.levels.size() ? ", " : "");
    s += "],\n  \"interpolation_ok\": " + std::string(rep.interpolation_ok ? "true" : "false") +
         ",\n  \"truncated\": " + std::string(rep.truncated ? "true" : "false") + ",\n";
    s += "  \"pairs\": [\n";
    for (std::size_t i = 0; i < rep.pairs.size(); ++i) {
        const auto& p = rep.pairs[i];
        s += "    {\"a\": " + std::to_string(p.level_a) + ", \"b\": " + std::to_string(p.level_b) +
             ", \"lhs\": " + json_number(p.lhs) + ", \"rhs\": " + json_number(p.rhs) + "}";
        s += (i + 1 < rep.pairs.size() ? ",\n" : "\n");
    }
    s += "  ],\n  \"per_time\": [\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        s += "    {\"t\": " + json_number(rep.times[i]) +
             ", \"converged\": " + (rep.converged[i] ? "true" : "false") + "}";
        s += (i + 1 < rep.times.size() ? ",\n" : "\n");
    }
    s += "  ]\n}\n";
    return s;
}

inline std::string flags_csv(const ConvergenceReport& rep) {
    std::string s = "t,converged\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        s += fmt(rep.times[i]) + ',' + (rep.converged[i] ? "1" : "0") + '\n';
    return s;
}

struct FlagSeries {
    std::vector<double> times;
    std::vector<std::uint8_t> converged;
};

inline FlagSeries load_flags_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open flags file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "t,converged")
        throw Error("parse error in " + path.string() + ": missing header 't,converged'");
    FlagSeries fs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != 2)
            throw Error("parse error in " + path.string() + ": line " + std::to_string(lineno));
        fs.times.push_back(detail::parse_double(cells[0], path.string()));
        fs.converged.push_back(cells[1] == "1" ? 1 : 0);
    }
    return fs;
}

} // namespace io
} // namespace nslab
