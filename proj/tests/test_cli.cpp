#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "easc/cli.hpp"
#include "easc/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kCli = EASC_CLI_PATH;
const fs::path kSource = EASC_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("easc_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + kCli.string() + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> r;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) r.push_back(std::stod(f));
        rows.push_back(r);
    }
    return rows;
}

} // namespace

TEST_CASE("trajectory reproduces the EP coalescence") {
    const auto d = scratch("traj");
    write(d / "c.json", {{"gamma1", 0.02}, {"gamma2", 0.01}, {"ei_mode", "off"},
                         {"trajectory", {{"omega_min", 0.0}, {"omega_max", 0.1}, {"steps", 201}}}});
    REQUIRE(run("trajectory --config " + (d / "c.json").string() + " --out " + d.string()) == 0);
    const auto rows = read_csv(d / "trajectory.csv");
    REQUIRE(rows.size() == 201);
    const auto& ep = rows[10];
    CHECK(ep[0] == doctest::Approx(0.005));
    CHECK(std::hypot(ep[1] - ep[3], ep[2] - ep[4]) < 1e-8);
    const auto m = json::parse(slurp(d / "manifest.json"));
    CHECK(m["manifest"]["version"] == easc::cli::kVersion);
    CHECK(m["gamma1"] == 0.02);
    CHECK(m["trajectory"]["steps"] == 201);
}

TEST_CASE("dynamics on quadratic baths has a nonzero X column") {
    const auto d = scratch("dyn");
    write(d / "c.json", {{"gamma1", 0.001}, {"gamma2", 0.002}, {"coupling", 0.08},
                         {"spectrum", {{"kind", "power_law"}, {"exponent", 2}}},
                         {"dynamics", {{"t_end", 300.0}}}});
    REQUIRE(run("dynamics --config " + (d / "c.json").string() + " --out " + d.string()) == 0);
    double xmax = 0.0;
    for (const auto& r : read_csv(d / "observables.csv")) xmax = std::max(xmax, std::abs(r[3]));
    CHECK(xmax > 0.01);
    CHECK(fs::exists(d / "amplitudes.csv"));
    const auto s = json::parse(slurp(d / "dynamics.json"));
    CHECK(s["comparison"]["max_x_deviation"].get<double>() < 1e-6);
}

TEST_CASE("validation failures exit 2 and leave nothing behind") {
    const auto d = scratch("bad");
    write(d / "c.json", {{"gamma1", -0.01}});
    CHECK(run("trajectory --config " + (d / "c.json").string() + " --out " + (d / "out").string()) == 2);
    CHECK_FALSE(fs::exists(d / "out" / "trajectory.csv"));
    CHECK_FALSE(fs::exists(d / "out" / "manifest.json"));
    const auto e = json::parse(slurp(d / "out" / "error.json"));
    CHECK(e["exit_code"] == 2);
    CHECK(e["error"] == "Validation");

    write(d / "c.json", {{"gamma1", 0.01}, {"gama2", 0.01}});
    CHECK(run("trajectory --config " + (d / "c.json").string() + " --out " + d.string()) == 2);
    write(d / "c.json", {{"trajectory", {{"stpes", 3}}}});
    CHECK(run("trajectory --config " + (d / "c.json").string() + " --out " + d.string()) == 2);
    CHECK(run("trajectory --set steps=oops --out " + d.string()) == 2);
    CHECK(run("no-such-command --out " + d.string()) == 2);
}

TEST_CASE("numerical failures exit 3 and remove partial outputs") {
    const auto d = scratch("numfail");
    write(d / "c.json", {{"spectrum", {{"kind", "power_law"}, {"exponent", 2}}},
                         {"critical_coupling", {{"gamma1_max", 0.01}, {"exponents", {2, 3}}}}});
    CHECK(run("critical-coupling --config " + (d / "c.json").string() + " --out " + d.string()) == 3);
    CHECK_FALSE(fs::exists(d / "critical_coupling.csv"));
    CHECK_FALSE(fs::exists(d / ".partial-critical_coupling"));
    CHECK(json::parse(slurp(d / "error.json"))["error"] == "NotConverged");
}

TEST_CASE("overrides") {
    json raw = {{"gamma1", 0.01}};
    easc::cli::apply_overrides(raw, {"gamma2=0.03", "trajectory.steps=5", "spectrum=flat", "ei_mode=off"});
    CHECK(raw["gamma2"] == 0.03);
    CHECK(raw["trajectory"]["steps"] == 5);
    CHECK(raw["spectrum"] == "flat");
    const auto r = easc::cli::resolve_config("trajectory", raw, ".");
    CHECK(r["ei_mode"] == "off");
    CHECK(r["trajectory"]["omega_max"] == 0.1);
    CHECK_FALSE(r.contains("dynamics"));
    CHECK_THROWS_AS(easc::cli::apply_overrides(raw, {"novalue"}), easc::Error);
}

TEST_CASE("output is independent of the thread count") {
    const auto d = scratch("det");
    write(d / "c.json", {{"spectrum", {{"kind", "power_law"}, {"exponent", 2}}},
                         {"parallelism", 1},
                         {"phase_diagram", {{"gamma1_points", 41}, {"omega_points", 41}}}});
    REQUIRE(run("phase-diagram --config " + (d / "c.json").string() + " --out " + (d / "a").string()) == 0);
    REQUIRE(run("phase-diagram --config " + (d / "c.json").string() + " --out " + (d / "b").string(),
                "EASC_THREADS=6") == 0);
    CHECK(slurp(d / "a" / "phase_diagram.csv") == slurp(d / "b" / "phase_diagram.csv"));
    CHECK(slurp(d / "a" / "phase_diagram.json") == slurp(d / "b" / "phase_diagram.json"));
    CHECK(json::parse(slurp(d / "b" / "manifest.json"))["manifest"]["threads"] == 6);
}

TEST_CASE("manifest reruns reproduce outputs") {
    const auto d = scratch("manifest");
    write(d / "c.json", {{"gamma1", 0.01}, {"gamma2", 0.02},
                         {"spectrum1", {{"kind", "tabulated"}, {"file", (kSource / "tests/data/stopped_light.csv").string()}}},
                         {"splitting", {{"omega_max", 4e-4}, {"steps", 51}}}});
    REQUIRE(run("splitting --config " + (d / "c.json").string() + " --out " + (d / "a").string()) == 0);
    REQUIRE(run("splitting --config " + (d / "a" / "manifest.json").string() + " --out " + (d / "b").string()) == 0);
    CHECK(slurp(d / "a" / "splitting.csv") == slurp(d / "b" / "splitting.csv"));

    write(d / "p.json", {{"spectrum", {{"kind", "power_law"}, {"exponent", 3}}}, {"gamma1", 0.004},
                         {"energy_map", {{"gamma1_points", 11}, {"omega_points", 11}}}});
    REQUIRE(run("energy-map --config " + (d / "p.json").string() + " --out " + (d / "c").string()) == 0);
    REQUIRE(run("energy-map --config " + (d / "c" / "manifest.json").string() + " --out " + (d / "e").string()) == 0);
    CHECK(slurp(d / "c" / "energy_map.csv") == slurp(d / "e" / "energy_map.csv"));
    CHECK(slurp(d / "c" / "manifest.json") == slurp(d / "e" / "manifest.json"));
}

TEST_CASE("remaining subcommands run") {
    const auto d = scratch("smoke");
    write(d / "c.json", {{"gamma1", 0.01}, {"gamma2", 0.005}, {"coupling", 0.03},
                         {"spectrum", {{"kind", "power_law"}, {"exponent", 2}}},
                         {"oracle", {{"mode_count", 1000}, {"t_end", 300.0}, {"couplings", {0.03, 0.05}}}},
                         {"usc", {{"steps", 31}}},
                         {"critical_coupling", {{"exponents", {1, 2}}}}});
    const auto cfg = (d / "c.json").string();
    REQUIRE(run("oracle --config " + cfg + " --out " + d.string()) == 0);
    CHECK(json::parse(slurp(d / "oracle.json")).size() == 2);
    REQUIRE(run("usc --config " + cfg + " --out " + d.string()) == 0);
    const auto u = json::parse(slurp(d / "usc.json"));
    CHECK(u["order"] == "easc_first");
    CHECK(u["max_closed_form_deviation"].get<double>() < 1e-10);
    CHECK(read_csv(d / "usc.csv").size() == 31);
    REQUIRE(run("critical-coupling --config " + cfg + " --out " + d.string()) == 0);
    const auto cc = slurp(d / "critical_coupling.csv");
    CHECK(std::count(cc.begin(), cc.end(), '\n') == 3);
    CHECK(json::parse(slurp(d / "critical_coupling.json")).size() == 2);
    REQUIRE(run("usc --set spectrum=flat --out " + (d / "flat").string()) == 0);
    CHECK(json::parse(slurp(d / "flat" / "usc.json"))["order"] == "usc_first");
}
