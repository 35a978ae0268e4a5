#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "nslab/field.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("nslab_cli_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct CmdResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

CmdResult run_cli(const TempDir& tmp, const std::string& args) {
    const fs::path log = tmp.path / "cmd.log";
    const std::string cmd = "cd " + tmp.path.string() + " && " + NSLAB_CLI_PATH + " " + args +
                            " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kTgConfig = R"(N = 16
scheme = mollified
m = 4
dt = 2e-3
T = 0.2
datum = taylor_green
amplitude = 1
sample_every = 1
out = tg_run
)";

} // namespace

TEST_CASE("simulate") {
    SUBCASE("valid taylor-green config") {
        TempDir tmp;
        write_file(tmp.path / "tg.cfg", kTgConfig);
        const CmdResult r = run_cli(tmp, "simulate --config tg.cfg");
        CHECK(r.exit_code == 0);
        std::ifstream csv(tmp.path / "tg_run" / "trajectory.csv");
        std::string header;
        std::getline(csv, header);
        CHECK(header == "t,l2,dirichlet,laplacian_l2,sup,vt_l2");
        CHECK(fs::exists(tmp.path / "tg_run" / "trajectory_aux.csv"));
        CHECK(fs::exists(tmp.path / "tg_run" / "manifest.json"));
    }
    SUBCASE("dt = 0 is a config error naming the key") {
        TempDir tmp;
        write_file(tmp.path / "bad.cfg", "N = 16\ndt = 0\nT = 1\ndatum = zero\n");
        const CmdResult r = run_cli(tmp, "simulate --config bad.cfg");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("dt") != std::string::npos);
    }
    SUBCASE("unknown keys are listed by name") {
        TempDir tmp;
        write_file(tmp.path / "bad.cfg", "N = 16\nviscosity = 2\n");
        const CmdResult r = run_cli(tmp, "simulate --config bad.cfg");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("viscosity") != std::string::npos);
    }
    SUBCASE("guard-tripping datum exits 2 with truncated artifacts") {
        TempDir tmp;
        write_file(tmp.path / "huge.cfg",
                   "N = 8\nscheme = mollified\nm = 4\ndt = 1e-2\nT = 1\n"
                   "datum = taylor_green\namplitude = 1e6\nout = boom\n");
        const CmdResult r = run_cli(tmp, "simulate --config huge.cfg");
        CHECK(r.exit_code == 2);
        CHECK(fs::exists(tmp.path / "boom" / "trajectory.csv"));
        const std::string man = slurp(tmp.path / "boom" / "manifest.json");
        CHECK(man.find("\"blew_up\": true") != std::string::npos);
        CHECK(man.find("\"blowup_time\": ") != std::string::npos);
    }
    SUBCASE("identical config and seed give byte-identical data artifacts") {
        TempDir tmp;
        std::string cfg = kTgConfig;
        cfg += "field_every = 10\nsnapshots = 1\n";
        write_file(tmp.path / "tg.cfg", cfg);
        CHECK(run_cli(tmp, "simulate --config tg.cfg --out run_a").exit_code == 0);
        CHECK(run_cli(tmp, "simulate --config tg.cfg --out run_b").exit_code == 0);
        CHECK(slurp(tmp.path / "run_a" / "trajectory.csv") ==
              slurp(tmp.path / "run_b" / "trajectory.csv"));
        CHECK(slurp(tmp.path / "run_a" / "trajectory_aux.csv") ==
              slurp(tmp.path / "run_b" / "trajectory_aux.csv"));
        CHECK(slurp(tmp.path / "run_a" / "field_000001.snap") ==
              slurp(tmp.path / "run_b" / "field_000001.snap"));
    }
}

TEST_CASE("verify") {
    SUBCASE("zero trajectory: all checks pass") {
        TempDir tmp;
        write_file(tmp.path / "z.cfg",
                   "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-2\nT = 0.3\n"
                   "datum = zero\nfield_every = 1\nsnapshots = 1\nout = z\n");
        REQUIRE(run_cli(tmp, "simulate --config z.cfg").exit_code == 0);
        const CmdResult r =
            run_cli(tmp, "verify --trajectory z/trajectory.csv --checks energy,ds,ddn,weak");
        CHECK(r.exit_code == 0);
        CHECK(fs::exists(tmp.path / "z" / "verify_energy.json"));
        CHECK(fs::exists(tmp.path / "z" / "verify_weak_form.json"));
    }
    SUBCASE("kolmogorov trajectory: energy and ddn pass") {
        TempDir tmp;
        write_file(tmp.path / "k.cfg",
                   "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-3\nT = 1\n"
                   "datum = kolmogorov\namplitude = 1\nout = k\n");
        REQUIRE(run_cli(tmp, "simulate --config k.cfg").exit_code == 0);
        const CmdResult r =
            run_cli(tmp, "verify --trajectory k/trajectory.csv --checks energy,ddn");
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("energy: pass") != std::string::npos);
        CHECK(r.output.find("ddn: pass") != std::string::npos);
    }
    SUBCASE("corrupted CSV (non-monotone t) exits 1 with a parse diagnostic") {
        TempDir tmp;
        write_file(tmp.path / "bad.csv", "t,l2,dirichlet,laplacian_l2,sup,vt_l2\n"
                                         "0,1,1,1,1,1\n0.2,1,1,1,1,1\n0.1,1,1,1,1,1\n");
        const CmdResult r = run_cli(tmp, "verify --trajectory bad.csv");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("non-monotone") != std::string::npos);
    }
    SUBCASE("unknown check name exits 1") {
        TempDir tmp;
        write_file(tmp.path / "k.cfg", "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-2\n"
                                       "T = 0.1\ndatum = kolmogorov\nout = k\n");
        REQUIRE(run_cli(tmp, "simulate --config k.cfg").exit_code == 0);
        const CmdResult r = run_cli(tmp, "verify --trajectory k/trajectory.csv --checks vorticity");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("vorticity") != std::string::npos);
    }
    SUBCASE("missing artifact exits 1") {
        TempDir tmp;
        const CmdResult r = run_cli(tmp, "verify --trajectory absent.csv");
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("epochs") {
    SUBCASE("zero trajectory, eta = 1: theta 0, terminal epoch, exit 0") {
        TempDir tmp;
        write_file(tmp.path / "z.cfg", "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-2\n"
                                       "T = 0.5\ndatum = zero\nout = z\n");
        REQUIRE(run_cli(tmp, "simulate --config z.cfg").exit_code == 0);
        const CmdResult r = run_cli(tmp, "epochs --trajectory z/trajectory.csv --eta 1 --c 0.1");
        CHECK(r.exit_code == 0);
        const std::string rep = slurp(tmp.path / "z" / "epoch_report.json");
        CHECK(rep.find("\"theta\": 0") != std::string::npos);
        CHECK(rep.find("\"uncovered_measure\": 0") != std::string::npos);
        CHECK(rep.find("\"holds\": true") != std::string::npos);
    }
    SUBCASE("normalized kolmogorov, eta = 0.5: t_m near ln 2 in the report") {
        TempDir tmp;
        write_file(tmp.path / "k.cfg",
                   "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-3\nT = 4.2\n"
                   "datum = kolmogorov\namplitude = 0.089793621468683663\n"
                   "sample_every = 1\nout = k\n");
        REQUIRE(run_cli(tmp, "simulate --config k.cfg").exit_code == 0);
        const CmdResult r =
            run_cli(tmp, "epochs --trajectory k/trajectory.csv --eta 0.5 --c 0.1");
        CHECK(r.exit_code == 0);
        const std::string rep = slurp(tmp.path / "k" / "epoch_report.json");
        CHECK(rep.find("\"t_m\": 0.69") != std::string::npos);
        CHECK(rep.find("\"holds\": true") != std::string::npos);
    }
    SUBCASE("horizon shorter than theta exits 1 and states the required horizon") {
        TempDir tmp;
        write_file(tmp.path / "k.cfg", "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-2\n"
                                       "T = 0.5\ndatum = kolmogorov\namplitude = 1\nout = k\n");
        REQUIRE(run_cli(tmp, "simulate --config k.cfg").exit_code == 0);
        const CmdResult r = run_cli(tmp, "epochs --trajectory k/trajectory.csv --eta 1");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("requires horizon") != std::string::npos);
    }
    SUBCASE("convergence flags gate the seeds") {
        TempDir tmp;
        write_file(tmp.path / "z.cfg", "N = 8\nscheme = galerkin\ncutoff = 2\ndt = 1e-1\n"
                                       "T = 0.5\ndatum = zero\nout = z\n");
        REQUIRE(run_cli(tmp, "simulate --config z.cfg").exit_code == 0);
        write_file(tmp.path / "flags.csv", "t,converged\n0,1\n0.1,1\n0.2,0\n0.3,1\n0.4,1\n0.5,1\n");
        const CmdResult r = run_cli(
            tmp, "epochs --trajectory z/trajectory.csv --flags flags.csv --eta 1 --c 0.1");
        CHECK(r.exit_code == 0);
    }
}

TEST_CASE("converge") {
    SUBCASE("two levels is a usage error") {
        TempDir tmp;
        write_file(tmp.path / "c.cfg", "N = 12\nscheme = galerkin\ndt = 1e-2\nT = 0.1\n"
                                       "datum = kolmogorov\nout = c\n");
        const CmdResult r = run_cli(tmp, "converge --config c.cfg --levels 1,2");
        CHECK(r.exit_code == 1);
        CHECK(r.output.find("levels") != std::string::npos);
    }
    SUBCASE("kolmogorov levels 1,2,4: pair distances zero, exit 0") {
        TempDir tmp;
        write_file(tmp.path / "c.cfg",
                   "N = 12\nscheme = galerkin\ndt = 2e-3\nT = 0.1\ndatum = kolmogorov\n"
                   "amplitude = 1\nsample_every = 5\nfield_every = 5\nout = c\n");
        const CmdResult r = run_cli(tmp, "converge --config c.cfg --levels 1,2,4");
        CHECK(r.exit_code == 0);
        CHECK(fs::exists(tmp.path / "c" / "convergence_report.json"));
        const std::string flags = slurp(tmp.path / "c" / "convergence_flags.csv");
        CHECK(flags.find("t,converged") == 0);
        CHECK(flags.find(",0") == std::string::npos); // every time convergent
        const std::string rep = slurp(tmp.path / "c" / "convergence_report.json");
        CHECK(rep.find("\"lhs\": 0") != std::string::npos);
    }
}

TEST_CASE("estimate-constant") {
    TempDir tmp;
    const CmdResult r = run_cli(tmp, "estimate-constant --n 8 --trials 20 --seed 1 --out est");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("c_hat") != std::string::npos);
    CHECK(fs::exists(tmp.path / "est" / "agmon_constant.json"));
}

TEST_CASE("usage") {
    TempDir tmp;
    CHECK(run_cli(tmp, "").exit_code == 1);
    CHECK(run_cli(tmp, "frobnicate").exit_code == 1);
    CHECK(run_cli(tmp, "simulate").exit_code == 1); // --config required
}
