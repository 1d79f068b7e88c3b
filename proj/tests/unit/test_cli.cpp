#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qmem/csv.hpp"
#include "qmem/pulses.hpp"

namespace fs = std::filesystem;

namespace {

const char* kBin = QMEM_CLI_BIN;
const char* kGoldenDir = QMEM_GOLDEN_DIR;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(kBin) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: ", path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> read_summary(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing summary: ", path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qmem_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void compare_with_golden(const std::string& name, const fs::path& out) {
    const fs::path golden = fs::path(kGoldenDir) / name;
    REQUIRE_MESSAGE(fs::exists(golden), "golden directory missing: ", golden.string());
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(golden)) {
        const auto produced = out / entry.path().filename();
        CHECK_MESSAGE(slurp(produced) == slurp(entry.path()),
                      "regression mismatch in ", entry.path().filename().string());
        ++compared;
    }
    CHECK(compared > 0);
}

}  // namespace

TEST_CASE("figure presets regenerate their golden datasets byte for byte") {
    struct Case {
        const char* name;
        std::string args;
    };
    const Case cases[] = {
        {"fig4", "load --preset fig4"},
        {"fig4_gaussian", "load --preset fig4 --pulse gaussian"},
        {"fig4_hyper", "load --preset fig4 --pulse hyper_gaussian"},
        {"fig5", "cycle --preset fig5"},
        {"fig3", "fig3 --preset fig3"},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        const auto out = fresh_dir(c.name);
        REQUIRE(run_cli(c.args + " --out_dir " + out.string()) == 0);
        compare_with_golden(c.name, out);
    }
}

TEST_CASE("identical configuration produces byte-identical output") {
    const auto out1 = fresh_dir("det1");
    const auto out2 = fresh_dir("det2");
    REQUIRE(run_cli("load --preset fig4 --out_dir " + out1.string()) == 0);
    REQUIRE(run_cli("load --preset fig4 --out_dir " + out2.string()) == 0);
    for (const char* file : {"trajectory.csv", "schedule.csv", "summary.txt"})
        CHECK(slurp(out1 / file) == slurp(out2 / file));
}

TEST_CASE("preset summaries carry the headline numbers") {
    const auto out = fresh_dir("vals");
    REQUIRE(run_cli("load --preset fig4 --out_dir " + out.string()) == 0);
    auto kv = read_summary(out / "summary.txt");
    CHECK(std::stod(kv.at("final_population")) >= 0.999);

    REQUIRE(run_cli("load --preset fig4 --pulse gaussian --out_dir " + out.string()) == 0);
    kv = read_summary(out / "summary.txt");
    CHECK(std::abs(std::stod(kv.at("final_dark_abs")) - 0.9942) <= 0.001);

    REQUIRE(run_cli("cycle --preset fig5 --out_dir " + out.string()) == 0);
    kv = read_summary(out / "summary.txt");
    CHECK(std::abs(std::stod(kv.at("release_peak_time")) - 30.0) < 0.1);
    CHECK(std::stod(kv.at("sech_fit_residual")) < 1e-3);
}

TEST_CASE("exit codes distinguish configuration errors from infeasibility") {
    const auto out = fresh_dir("codes");

    SUBCASE("missing subcommand") { CHECK(run_cli("") == 2); }
    SUBCASE("unknown flag") { CHECK(run_cli("load --no_such_flag 3") == 2); }
    SUBCASE("empty config file") {
        const auto cfg = out / "empty.cfg";
        std::ofstream(cfg) << "# nothing here\n";
        CHECK(run_cli("load --config " + cfg.string()) == 2);
    }
    SUBCASE("unknown config key") {
        const auto cfg = out / "bad.cfg";
        std::ofstream(cfg) << "no_such_key = 1\n";
        CHECK(run_cli("load --config " + cfg.string()) == 2);
    }
    SUBCASE("short packet cannot be impedance matched") {
        CHECK(run_cli("synthesize --gamma_T 2 --out_dir " + out.string()) == 3);
    }
    SUBCASE("config file drives a run") {
        const auto cfg = out / "good.cfg";
        std::ofstream(cfg) << "gamma_T = 4\npulse = gaussian\n";
        CHECK(run_cli("load --config " + cfg.string() + " --out_dir " + out.string()) == 0);
        const auto kv = read_summary(out / "summary.txt");
        CHECK(std::abs(std::stod(kv.at("final_dark_abs")) - 0.9942) <= 0.001);
    }
}

TEST_CASE("environment variable overrides the output directory") {
    const auto out = fresh_dir("envdir");
    const auto decoy = fresh_dir("envdir_decoy");
    setenv("QMEM_OUT_DIR", out.string().c_str(), 1);
    const int code = run_cli("load --preset fig4 --out_dir " + decoy.string());
    unsetenv("QMEM_OUT_DIR");
    REQUIRE(code == 0);
    CHECK(fs::exists(out / "summary.txt"));
    CHECK_FALSE(fs::exists(decoy / "summary.txt"));
}

TEST_CASE("full-model run through the binary") {
    const auto out = fresh_dir("full");
    REQUIRE(run_cli("load --model both --gamma_T 8 --gamma_a_T 0 --grid_t0_T -8 "
                    "--grid_points 2048 --out_dir " +
                    out.string()) == 0);
    const auto kv = read_summary(out / "summary.txt");
    CHECK(std::stod(kv.at("max_population_deviation")) < 1e-2);
    CHECK(std::stod(kv.at("norm_drift")) < 1e-6);
    CHECK(fs::exists(out / "full_trajectory.csv"));
    CHECK(fs::exists(out / "modes.csv"));
}

TEST_CASE("polarization command reports unit fidelity for a lossless cycle") {
    const auto out = fresh_dir("pol");
    REQUIRE(run_cli("polarization --out_dir " + out.string()) == 0);
    const auto kv = read_summary(out / "summary.txt");
    CHECK(std::stod(kv.at("fidelity")) > 1.0 - 1e-6);
    CHECK(std::stod(kv.at("relative_phase_error")) < 1e-9);
    CHECK(fs::exists(out / "polarization_report.json"));
    CHECK(fs::exists(out / "polarization_envelopes.csv"));
}

TEST_CASE("synthesized schedules replay from their CSV export") {
    const auto out = fresh_dir("replay");
    REQUIRE(run_cli("synthesize --preset fig4 --out_dir " + out.string()) == 0);
    const auto schedule_file = out / "schedule.csv";
    REQUIRE(fs::exists(schedule_file));
    REQUIRE(run_cli("load --preset fig4 --schedule file:" + schedule_file.string() +
                    " --out_dir " + out.string()) == 0);
    const auto kv = read_summary(out / "summary.txt");
    CHECK(std::stod(kv.at("final_population")) >= 0.999);
}

TEST_CASE("custom envelopes import from csv") {
    const auto out = fresh_dir("custom");
    const qmem::TimeGrid grid(-10, 10, 4096);
    const auto gauss = qmem::PulseEnvelope::make_gaussian(grid, 1.0, 0.0);
    std::vector<double> re(grid.size());
    for (int i = 0; i < grid.size(); ++i) re[i] = gauss.values()[i].real();
    const auto pulse_file = out / "pulse.csv";
    qmem::csv::write(pulse_file.string(), {{"t", grid.times()}, {"re", re}});

    REQUIRE(run_cli("load --preset fig4 --grid_points 4096 --pulse csv:" +
                    pulse_file.string() + " --out_dir " + out.string()) == 0);
    const auto kv = read_summary(out / "summary.txt");
    CHECK(std::abs(std::stod(kv.at("final_dark_abs")) - 0.9942) <= 0.001);
}

TEST_CASE("sweep and check commands emit their summaries") {
    const auto out = fresh_dir("misc");
    REQUIRE(run_cli("sweep-timing --n_deltas 5 --grid_points 2048 --out_dir " +
                    out.string()) == 0);
    auto kv = read_summary(out / "summary.txt");
    const double exponent = std::stod(kv.at("exponent"));
    CHECK(exponent > 1.9);
    CHECK(exponent < 2.1);

    REQUIRE(run_cli("check-adiabaticity --gamma_T 8 --gamma_a_T 0.5 --out_dir " +
                    out.string()) == 0);
    kv = read_summary(out / "summary.txt");
    CHECK(kv.at("pass") == "1");

    REQUIRE(run_cli("oracle-classical --out_dir " + out.string()) == 0);
    kv = read_summary(out / "summary.txt");
    CHECK(std::stod(kv.at("ode_recursion_max_rel_dev")) < 0.01);
}
