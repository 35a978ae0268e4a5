// ns-lab: batch front-end for the spectral Navier-Stokes estimate toolkit.
// Subcommands: simulate, verify, epochs, converge, estimate-constant.
// Exit codes: 0 success, 1 usage/config, 2 blow-up, 3 estimate contradiction.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "nslab/nslab.hpp"

namespace fs = std::filesystem;
using namespace nslab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBlowup = 2;
constexpr int kExitContradiction = 3;

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

struct Manifest {
    std::string command;
    std::string config_echo;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, std::string>> rollup; // key -> raw json value
    double wall_seconds = 0.0;

    std::string text() const {
        std::string s = "{\n";
        s += "  \"tool\": \"ns-lab\",\n";
        s += "  \"version\": \"" + std::string(version) + "\",\n";
        s += "  \"command\": \"" + command + "\",\n";
        s += "  \"config\": \"" + json_escape(config_echo) + "\",\n";
        s += "  \"artifacts\": [";
        for (std::size_t i = 0; i < artifacts.size(); ++i)
            s += "\"" + artifacts[i] + "\"" + (i + 1 < artifacts.size() ? ", " : "");
        s += "],\n";
        s += "  \"rollup\": {";
        for (std::size_t i = 0; i < rollup.size(); ++i)
            s += "\"" + rollup[i].first + "\": " + rollup[i].second +
                 (i + 1 < rollup.size() ? ", " : "");
        s += "},\n";
        // timings are environment noise; everything above is reproducible
        s += "  \"timings\": {\"wall_seconds\": " + io::fmt(wall_seconds) + "}\n";
        s += "}\n";
        return s;
    }
};

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(clock::now() - start_).count();
    }

  private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

int cmd_simulate(const std::string& config_path, const std::string& out_override,
                 long seed_override) {
    Stopwatch watch;
    RunConfig rc = load_config(config_path);
    if (!out_override.empty()) rc.out_dir = out_override;
    if (seed_override >= 0) rc.solver.datum.seed = std::uint64_t(seed_override);
    rc.solver.validate();
    const fs::path out = rc.out_dir;

    const Trajectory traj = run(rc.solver);

    Manifest man;
    man.command = "simulate";
    man.config_echo = config_echo(rc);
    io::atomic_write(out / "trajectory.csv", io::trajectory_csv(traj));
    man.artifacts.push_back("trajectory.csv");
    io::atomic_write(out / "trajectory_aux.csv", io::trajectory_aux_csv(traj));
    man.artifacts.push_back("trajectory_aux.csv");

    if (rc.write_snapshots && rc.solver.field_every > 0) {
        int index = 0;
        for (const auto& s : traj.samples) {
            if (!s.field) continue;
            char name[32];
            std::snprintf(name, sizeof name, "field_%06d.snap", index++);
            // snapshots are presented at the configured resolution
            const SpectralField full = resample(*s.field, rc.solver.resolution);
            io::atomic_write(out / name,
                             io::snapshot_text(full, s.t, rc.solver.scheme.tag()));
            man.artifacts.push_back(name);
        }
    }

    man.rollup.emplace_back("pass", traj.blew_up ? "false" : "true");
    man.rollup.emplace_back("blew_up", traj.blew_up ? "true" : "false");
    man.rollup.emplace_back("blowup_time", io::json_number(traj.blowup_time));
    man.rollup.emplace_back("blowup_reason", "\"" + json_escape(traj.blowup_reason) + "\"");
    man.rollup.emplace_back("samples", std::to_string(traj.samples.size()));
    man.wall_seconds = watch.seconds();
    io::atomic_write(out / "manifest.json", man.text());

    if (traj.blew_up) {
        std::cerr << "blow-up at t = " << io::fmt(traj.blowup_time) << " ("
                  << traj.blowup_reason << "); trajectory truncated\n";
        return kExitBlowup;
    }
    std::cout << "wrote " << (out / "trajectory.csv").string() << " ("
              << traj.samples.size() << " samples)\n";
    return kExitOk;
}

/// Attach field snapshots living next to the trajectory CSV (verify --checks weak).
void attach_snapshots(Trajectory& traj, const fs::path& dir) {
    std::vector<io::Snapshot> snaps;
    std::vector<fs::path> files;
    if (!fs::exists(dir)) return;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".snap") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) snaps.push_back(io::load_snapshot(f));
    for (auto& s : traj.samples)
        for (auto& snap : snaps)
            if (std::abs(snap.t - s.t) <= 1e-12 * std::max(1.0, std::abs(s.t)))
                s.field = snap.field;
}

int cmd_verify(const std::string& traj_path, std::vector<std::string> checks,
               const std::string& out_override, double agmon_c_override) {
    Stopwatch watch;
    const fs::path tp = traj_path;
    Trajectory traj = io::load_trajectory_csv(tp);
    if (agmon_c_override > 0.0) traj.config.agmon_c = agmon_c_override;
    const fs::path out = out_override.empty() ? tp.parent_path() : fs::path(out_override);

    if (checks.empty()) checks = {"energy", "ds", "ddn"};
    std::vector<InequalityReport> reports;
    for (const std::string& name : checks) {
        if (name == "energy")
            reports.push_back(energy_check(traj));
        else if (name == "ds")
            reports.push_back(ds_bound_check(traj));
        else if (name == "ddn")
            reports.push_back(ddn_residual(traj));
        else if (name == "weak") {
            attach_snapshots(traj, tp.parent_path());
            bool have_fields = true;
            for (const auto& s : traj.samples) have_fields = have_fields && s.field.has_value();
            if (!have_fields)
                throw Error("check 'weak' needs field snapshots next to the trajectory "
                            "(simulate with snapshots = 1 and field_every = sample_every)");
            const int n = traj.samples.front().field->n;
            std::vector<WeakTestFunction> tests;
            const Vec3i modes[3] = {{0, 1, 0}, {1, 1, 0}, {1, 0, 1}};
            for (int i = 0; i < 3; ++i) {
                WeakTestFunction w;
                w.mode = modes[i];
                w.polarization = i % 2;
                w.phase = 0.2 * i;
                w.window = {0.0, 0.9 * traj.t_end()};
                if (2 * std::max({std::abs(w.mode[0]), std::abs(w.mode[1]),
                                  std::abs(w.mode[2])}) < n)
                    tests.push_back(w);
            }
            reports.push_back(weak_form_residual(traj, tests));
        } else
            throw Error("unknown check name '" + name + "' (energy|ds|ddn|weak)");
    }

    Manifest man;
    man.command = "verify";
    man.config_echo = "trajectory = " + traj_path;
    bool all_pass = true;
    for (const auto& rep : reports) {
        const std::string series = "verify_" + rep.name + "_series.csv";
        io::atomic_write(out / series, io::inequality_series_csv(rep));
        io::atomic_write(out / ("verify_" + rep.name + ".json"),
                         io::inequality_json(rep, series));
        man.artifacts.push_back("verify_" + rep.name + ".json");
        man.artifacts.push_back(series);
        all_pass = all_pass && rep.pass;
        // violations within 10x tolerance are discretization-scale warnings
        const char* verdict =
            rep.pass ? "pass" : (rep.hard_failure() ? "FAIL" : "FAIL (within 10x tolerance)");
        std::cout << rep.name << ": " << verdict << " (max violation "
                  << io::fmt(rep.max_violation) << ", tolerance " << io::fmt(rep.tolerance)
                  << ")\n";
    }
    man.rollup.emplace_back("pass", all_pass ? "true" : "false");
    man.wall_seconds = watch.seconds();
    io::atomic_write(out / "verify_manifest.json", man.text());
    return all_pass ? kExitOk : kExitContradiction;
}

int cmd_epochs(const std::string& traj_path, const std::string& flags_path, double eta,
               double c, const std::string& out_override) {
    Stopwatch watch;
    const fs::path tp = traj_path;
    Trajectory traj = io::load_trajectory_csv(tp);
    const fs::path out = out_override.empty() ? tp.parent_path() : fs::path(out_override);

    std::vector<std::uint8_t> flags;
    const std::vector<std::uint8_t>* flags_ptr = nullptr;
    if (!flags_path.empty()) {
        const io::FlagSeries fl = io::load_flags_csv(flags_path);
        flags.assign(traj.samples.size(), 1);
        for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            const double t = traj.samples[i].t;
            bool found = false;
            for (std::size_t j = 0; j < fl.times.size(); ++j)
                if (std::abs(fl.times[j] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
                    flags[i] = fl.converged[j];
                    found = true;
                    break;
                }
            if (!found) flags[i] = 0; // unmatched times cannot seed
        }
        flags_ptr = &flags;
    }

    if (c <= 0.0) c = traj.config.formula_c();
    const EpochReport rep = make_epoch_report(traj, eta, c, flags_ptr);

    Manifest man;
    man.command = "epochs";
    man.config_echo = "trajectory = " + traj_path + "\neta = " + io::fmt(eta) +
                      "\nc = " + io::fmt(c);
    io::atomic_write(out / "epoch_report.json", io::epoch_report_json(rep));
    man.artifacts.push_back("epoch_report.json");
    const std::string table = io::epoch_table(rep);
    io::atomic_write(out / "epoch_table.txt", table);
    man.artifacts.push_back("epoch_table.txt");
    std::cout << table;
    man.rollup.emplace_back("pass", "true");
    man.rollup.emplace_back("epochs", std::to_string(rep.epochs.size()));
    man.rollup.emplace_back("uncovered_measure", io::json_number(rep.uncovered_measure));
    man.wall_seconds = watch.seconds();
    io::atomic_write(out / "epochs_manifest.json", man.text());
    return kExitOk;
}

int cmd_converge(const std::string& config_path, const std::vector<int>& levels,
                 const std::string& out_override, long seed_override) {
    Stopwatch watch;
    RunConfig rc = load_config(config_path);
    if (!out_override.empty()) rc.out_dir = out_override;
    if (seed_override >= 0) rc.solver.datum.seed = std::uint64_t(seed_override);
    const fs::path out = rc.out_dir;

    const ConvergenceReport rep = convergence_sweep(rc.solver, levels);

    Manifest man;
    man.command = "converge";
    man.config_echo = config_echo(rc);
    io::atomic_write(out / "convergence_report.json", io::convergence_json(rep));
    man.artifacts.push_back("convergence_report.json");
    io::atomic_write(out / "convergence_flags.csv", io::flags_csv(rep));
    man.artifacts.push_back("convergence_flags.csv");
    man.rollup.emplace_back("pass", rep.interpolation_ok ? "true" : "false");
    man.rollup.emplace_back("truncated", rep.truncated ? "true" : "false");
    man.wall_seconds = watch.seconds();
    io::atomic_write(out / "converge_manifest.json", man.text());

    for (const auto& p : rep.pairs)
        std::cout << "levels " << p.level_a << " vs " << p.level_b << ": lhs "
                  << io::fmt(p.lhs) << ", rhs " << io::fmt(p.rhs) << "\n";
    if (rep.truncated) {
        std::cerr << "a level blew up; partial report written\n";
        return kExitBlowup;
    }
    return rep.interpolation_ok ? kExitOk : kExitContradiction;
}

int cmd_estimate_constant(int n, int trials, long seed, const std::string& out_dir) {
    Stopwatch watch;
    const double c_hat = estimate_agmon_constant(n, trials, std::uint64_t(seed));
    const double c_a = 1.5 * c_hat; // default safety margin 0.5
    const double c_formula = 0.5 * c_a * c_a * c_a * c_a;
    std::cout << "c_hat = " << io::fmt(c_hat) << "\n";
    std::cout << "agmon_c (with margin 0.5) = " << io::fmt(c_a) << "\n";
    std::cout << "formula constant 0.5*agmon_c^4 = " << io::fmt(c_formula) << "\n";
    if (!out_dir.empty()) {
        Manifest man;
        man.command = "estimate-constant";
        man.config_echo = "N = " + std::to_string(n) + "\ntrials = " + std::to_string(trials) +
                          "\nseed = " + std::to_string(seed);
        std::string j = "{\n  \"c_hat\": " + io::fmt(c_hat) + ",\n  \"agmon_c\": " +
                        io::fmt(c_a) + ",\n  \"formula_c\": " + io::fmt(c_formula) + "\n}\n";
        io::atomic_write(fs::path(out_dir) / "agmon_constant.json", j);
        man.artifacts.push_back("agmon_constant.json");
        man.rollup.emplace_back("pass", "true");
        man.wall_seconds = watch.seconds();
        io::atomic_write(fs::path(out_dir) / "estimate_manifest.json", man.text());
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ns-lab: spectral Navier-Stokes estimate toolkit"};
    app.require_subcommand(1);

    std::string config_path, traj_path, flags_path, out_dir, checks_csv;
    double eta = 1.0, c_const = -1.0;
    long seed = -1;
    int est_n = 16, est_trials = 200;
    std::vector<int> levels;

    CLI::App* sim = app.add_subcommand("simulate", "integrate a configured system");
    sim->add_option("--config", config_path, "key=value config file")->required();
    sim->add_option("--out", out_dir, "output directory (overrides config)");
    sim->add_option("--seed", seed, "override the datum seed");

    CLI::App* ver = app.add_subcommand("verify", "run a priori estimate checks");
    ver->add_option("--trajectory", traj_path, "trajectory CSV")->required();
    ver->add_option("--checks", checks_csv, "comma list: energy,ds,ddn,weak");
    ver->add_option("--out", out_dir, "output directory");
    ver->add_option("--c", c_const, "Agmon constant c_A for the arctan majorant");

    CLI::App* epo = app.add_subcommand("epochs", "structure-theorem epoch cover");
    epo->add_option("--trajectory", traj_path, "trajectory CSV")->required();
    epo->add_option("--flags", flags_path, "per-time convergence flags CSV");
    epo->add_option("--eta", eta, "pigeonhole parameter")->required();
    epo->add_option("--c", c_const, "formula constant (default 0.5*agmon_c^4)");
    epo->add_option("--out", out_dir, "output directory");

    CLI::App* con = app.add_subcommand("converge", "cross-level Cauchy diagnostics");
    con->add_option("--config", config_path, "key=value config file")->required();
    con->add_option("--levels", levels, "three or more increasing levels")->delimiter(',');
    con->add_option("--out", out_dir, "output directory (overrides config)");
    con->add_option("--seed", seed, "override the datum seed");

    CLI::App* est = app.add_subcommand("estimate-constant", "calibrate the Agmon constant");
    est->add_option("--n", est_n, "resolution");
    est->add_option("--trials", est_trials, "random fields to sample");
    est->add_option("--seed", seed, "sampling seed");
    est->add_option("--out", out_dir, "output directory (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed);
        if (ver->parsed()) {
            std::vector<std::string> checks;
            std::string cur;
            for (char ch : checks_csv) {
                if (ch == ',') {
                    if (!cur.empty()) checks.push_back(cur);
                    cur.clear();
                } else
                    cur += ch;
            }
            if (!cur.empty()) checks.push_back(cur);
            return cmd_verify(traj_path, checks, out_dir, c_const);
        }
        if (epo->parsed()) return cmd_epochs(traj_path, flags_path, eta, c_const, out_dir);
        if (con->parsed()) {
            if (levels.size() < 3) {
                std::cerr << "converge: need at least 3 increasing levels (--levels a,b,c)\n";
                return kExitUsage;
            }
            return cmd_converge(config_path, levels, out_dir, seed);
        }
        if (est->parsed())
            return cmd_estimate_constant(est_n, est_trials, seed < 0 ? 1 : seed, out_dir);
    } catch (const PigeonholeContradiction& e) {
        std::cerr << "estimate contradiction: " << e.what() << "\n";
        return kExitContradiction;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
