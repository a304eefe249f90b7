#include "easc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "easc/csv.hpp"
#include "easc/dynamics.hpp"
#include "easc/error.hpp"
#include "easc/microscopic.hpp"
#include "easc/parallel.hpp"
#include "easc/regimes.hpp"
#include "easc/serialize.hpp"
#include "easc/spectral.hpp"
#include "easc/usc.hpp"

namespace easc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kPhysicalKeys = {"omega0",   "coupling",  "gamma1",
                                                "gamma2",   "spectrum",  "spectrum1",
                                                "spectrum2", "ei_mode",  "diagonal_mode"};

const std::map<std::string, json>& block_defaults() {
    static const std::map<std::string, json> defaults = [] {
        const json grid = {{"ratio", 2.0},          {"gamma1_min", 1e-4},
                           {"gamma1_max", 10.0},    {"gamma1_points", 201},
                           {"gamma1_spacing", "log"}, {"omega_min", 0.0},
                           {"omega_max", 0.1},      {"omega_points", 201}};
        std::map<std::string, json> d;
        d["trajectory"] = {{"omega_min", 0.0}, {"omega_max", 0.1}, {"steps", 1001}};
        d["phase_diagram"] = grid;
        d["energy_map"] = grid;
        d["critical_coupling"] = {{"ratio", 2.0},
                                  {"gamma1_min", 1e-6},
                                  {"gamma1_max", 1.0},
                                  {"ladder_ratio", 1.5},
                                  {"tol", 1e-3},
                                  {"search_limit", nullptr},
                                  {"require_convergence", true},
                                  {"exponents", json::array()}};
        d["splitting"] = {{"omega_min", 0.0}, {"omega_max", 0.1}, {"steps", 1001}};
        d["dynamics"] = {{"t_end", 1000.0},
                         {"dt", 0.01},
                         {"store_every", 10},
                         {"rotating_frame", false},
                         {"initial", "10"}};
        d["oracle"] = {{"mode_count", 4000},        {"band_lo", 0.4},   {"band_hi", 1.6},
                       {"max_dt", 0.01},            {"t_end", 400.0},   {"fit_start", 40.0},
                       {"exponents", json::array()}, {"couplings", json::array()}};
        d["usc"] = {{"omega_min", 0.0},         {"omega_max", 0.3}, {"steps", 301},
                    {"critical_coupling", true}, {"ratio", 2.0},     {"gamma1_max", 1.0},
                    {"tol", 1e-3}};
        return d;
    }();
    return defaults;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::Validation, msg); }

bool same_kind(const json& def, const json& v) {
    if (def.is_null()) return v.is_null() || v.is_number();
    if (def.is_number()) return v.is_number();
    if (def.is_boolean()) return v.is_boolean();
    if (def.is_string()) return v.is_string();
    if (def.is_array()) {
        if (!v.is_array()) return false;
        for (const auto& e : v) {
            if (!e.is_number()) return false;
        }
        return true;
    }
    return false;
}

json merge_block(const std::string& name, const json& user) {
    const json& def = block_defaults().at(name);
    if (!user.is_object()) invalid("'" + name + "' must be an object");
    json out = def;
    for (const auto& [k, v] : user.items()) {
        if (!def.contains(k)) invalid("unknown key '" + name + "." + k + "'");
        if (!same_kind(def[k], v)) invalid("'" + name + "." + k + "' has the wrong type");
        out[k] = v;
    }
    return out;
}

double num(const json& b, const char* key) { return b.at(key).get<double>(); }

std::size_t count(const json& b, const char* key, std::size_t min) {
    const double v = num(b, key);
    if (!(v >= static_cast<double>(min)) || v != std::floor(v) || v > 1e9) {
        invalid(std::string(key) + " must be an integer >= " + std::to_string(min));
    }
    return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const json& b, const char* key) {
    std::vector<double> v;
    for (const auto& e : b.at(key)) v.push_back(e.get<double>());
    return v;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 1) v.back() = hi;
    return v;
}

std::vector<double> gamma_grid(const json& b) {
    const double lo = num(b, "gamma1_min");
    const double hi = num(b, "gamma1_max");
    const std::size_t n = count(b, "gamma1_points", 2);
    const auto spacing = b.at("gamma1_spacing").get<std::string>();
    if (!(lo > 0.0) || !(hi > lo)) invalid("need 0 < gamma1_min < gamma1_max");
    if (spacing == "linear") return linspace(lo, hi, n);
    if (spacing != "log") invalid("gamma1_spacing must be log or linear");
    auto v = linspace(std::log(lo), std::log(hi), n);
    for (auto& x : v) x = std::exp(x);
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> omega_grid(const json& b) {
    const double lo = num(b, "omega_min");
    const double hi = num(b, "omega_max");
    if (!(lo >= 0.0) || !(hi > lo)) invalid("need 0 <= omega_min < omega_max");
    return linspace(lo, hi, count(b, "omega_points", 2));
}

unsigned thread_count(const json& resolved) {
    if (const char* env = std::getenv("EASC_THREADS"); env && *env) return default_thread_count();
    return resolved.at("parallelism").get<unsigned>();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json matrix_json(const std::vector<std::pair<double, double>>& pts) {
    json a = json::array();
    for (const auto& [x, y] : pts) a.push_back({x, y});
    return a;
}

using Outputs = std::vector<std::string>;

Outputs run_trajectory(const model::SystemConfig& cfg, const json& b, unsigned threads,
                       const fs::path& dir) {
    const auto pts = spectral::trajectory(cfg, num(b, "omega_min"), num(b, "omega_max"),
                                          count(b, "steps", 2), threads);
    spectral::write_trajectory_csv(dir / "trajectory.csv", pts);
    return {"trajectory.csv"};
}

regimes::PhaseDiagram diagram(const model::SystemConfig& cfg, const json& b, unsigned threads) {
    return regimes::phase_diagram(cfg, gamma_grid(b), num(b, "ratio"), omega_grid(b), threads);
}

Outputs run_phase_diagram(const model::SystemConfig& cfg, const json& b, unsigned threads,
                          const fs::path& dir) {
    const auto pd = diagram(cfg, b, threads);
    regimes::write_phase_diagram_csv(dir / "phase_diagram.csv", pd);
    regimes::write_phase_diagram_summary(dir / "phase_diagram.json", pd);
    return {"phase_diagram.csv", "phase_diagram.json"};
}

Outputs run_energy_map(const model::SystemConfig& cfg, const json& b, unsigned threads,
                       const fs::path& dir) {
    regimes::write_energy_map_csv(dir / "energy_map.csv", diagram(cfg, b, threads));
    return {"energy_map.csv"};
}

Outputs run_critical(const model::SystemConfig& cfg, const json& b, unsigned threads,
                     const fs::path& dir) {
    regimes::CriticalOptions opt;
    opt.gamma1_min = num(b, "gamma1_min");
    opt.ladder_ratio = num(b, "ladder_ratio");
    if (!b.at("search_limit").is_null()) opt.search_limit = num(b, "search_limit");
    opt.require_convergence = b.at("require_convergence").get<bool>();
    opt.threads = threads;

    std::vector<model::SystemConfig> cases;
    for (double n : numbers(b, "exponents")) {
        auto c = cfg;
        c.spectrum1 = c.spectrum2 = model::ReservoirSpectrum::power_law(n);
        cases.push_back(c);
    }
    if (cases.empty()) cases.push_back(cfg);

    CsvWriter csv(dir / "critical_coupling.csv",
                  {"spectrum", "omega_cp", "gamma1_at_cp", "converged"});
    json summary = json::array();
    for (const auto& c : cases) {
        const auto r = regimes::critical_coupling(c, num(b, "ratio"), num(b, "gamma1_max"),
                                                  num(b, "tol"), opt);
        const auto label = c.spectrum1.describe();
        csv.field(label).field(r.omega_cp).field(r.gamma1_at_cp).field(r.converged ? 1.0 : 0.0);
        csv.end_row();
        summary.push_back({{"spectrum", label},
                           {"omega_cp", r.omega_cp},
                           {"gamma1_at_cp", r.gamma1_at_cp},
                           {"converged", r.converged},
                           {"ladder", matrix_json(r.ladder)}});
    }
    write_json(dir / "critical_coupling.json", summary);
    return {"critical_coupling.csv", "critical_coupling.json"};
}

Outputs run_splitting(const model::SystemConfig& cfg, const json& b, unsigned threads,
                      const fs::path& dir) {
    const auto pts = regimes::real_splitting_curve(cfg, num(b, "omega_min"), num(b, "omega_max"),
                                                   count(b, "steps", 2), threads);
    regimes::write_splitting_csv(dir / "splitting.csv", pts);
    return {"splitting.csv"};
}

Outputs run_dynamics(const model::SystemConfig& cfg, const json& b, unsigned, const fs::path& dir) {
    dynamics::IntegrationOptions opt;
    opt.dt = num(b, "dt");
    opt.store_every = count(b, "store_every", 1);
    opt.rotating_frame = b.at("rotating_frame").get<bool>();
    const double t_end = num(b, "t_end");
    if (!(t_end > 0.0)) invalid("t_end must be > 0");
    if (!(opt.dt > 0.0)) invalid("dt must be > 0");

    const auto initial = b.at("initial").get<std::string>();
    dynamics::AmplitudeState a0;
    dynamics::DensityMatrix3 rho0 = dynamics::DensityMatrix3::Zero();
    if (initial == "10") {
        a0.a1 = 1.0;
        rho0(0, 0) = 1.0;
    } else if (initial == "01") {
        a0.a2 = 1.0;
        rho0(1, 1) = 1.0;
    } else {
        invalid("initial must be \"10\" or \"01\"");
    }

    const auto amp = dynamics::evolve_amplitudes(cfg, a0, t_end, opt);
    const auto me = dynamics::evolve_density_matrix(cfg, rho0, t_end, opt);
    const auto cmp = dynamics::compare_series(amp, me);
    dynamics::write_amplitudes_csv(dir / "amplitudes.csv", amp);
    dynamics::write_observables_csv(dir / "observables.csv", me.observables);
    write_json(dir / "dynamics.json",
               {{"max_trace_drift", me.max_trace_drift},
                {"min_eigenvalue", me.min_eigenvalue},
                {"positivity_violations", me.positivity_violations},
                {"comparison",
                 {{"max_e_deviation", cmp.max_e_deviation},
                  {"max_x_deviation", cmp.max_x_deviation},
                  {"max_abs_x_master", cmp.max_abs_x_master},
                  {"max_abs_x_amplitude", cmp.max_abs_x_amplitude},
                  {"max_abs_re_rho_1001", cmp.max_abs_re_rho_1001}}}});
    return {"amplitudes.csv", "observables.csv", "dynamics.json"};
}

Outputs run_oracle(const model::SystemConfig& cfg, const json& b, unsigned threads,
                   const fs::path& dir) {
    microscopic::OracleOptions opt;
    opt.mode_count = count(b, "mode_count", microscopic::kMinModes);
    opt.band_lo = num(b, "band_lo");
    opt.band_hi = num(b, "band_hi");
    opt.max_dt = num(b, "max_dt");
    opt.t_end = num(b, "t_end");
    opt.fit_start = num(b, "fit_start");

    auto exponents = numbers(b, "exponents");
    auto couplings = numbers(b, "couplings");
    std::vector<model::SystemConfig> cases;
    const std::size_t ne = std::max<std::size_t>(exponents.size(), 1);
    const std::size_t nc = std::max<std::size_t>(couplings.size(), 1);
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            auto c = cfg;
            if (!exponents.empty()) {
                c.spectrum1 = c.spectrum2 = model::ReservoirSpectrum::power_law(exponents[i]);
            }
            if (!couplings.empty()) c.coupling = couplings[j];
            c.validate();
            cases.push_back(c);
        }
    }
    std::vector<microscopic::OracleReport> reports(cases.size());
    parallel_for(cases.size(), threads,
                 [&](std::size_t k) { reports[k] = microscopic::run_oracle(cases[k], opt); });
    microscopic::write_oracle_json(dir / "oracle.json", reports);
    return {"oracle.json"};
}

Outputs run_usc(const model::SystemConfig& cfg, const json& b, unsigned threads, const fs::path& dir) {
    const double lo = num(b, "omega_min");
    const double hi = num(b, "omega_max");
    if (!(lo >= 0.0) || !(hi > lo)) invalid("need 0 <= omega_min < omega_max");
    const auto grid = linspace(lo, hi, count(b, "steps", 2));
    const auto rows = usc::usc_deviation_report(cfg.omega0, grid);
    usc::write_usc_csv(dir / "usc.csv", rows);

    double closed = 0.0;
    double symmetry = 0.0;
    for (double g : grid) {
        const auto f = usc::usc_eigenfrequencies(cfg.omega0, g);
        closed = std::max({closed, std::abs(f.full_s - f.closed_s), std::abs(f.full_a - f.closed_a)});
        symmetry = std::max(symmetry, usc::particle_hole_residual(usc::build_usc_generator(cfg.omega0, g)));
    }
    const double threshold = usc::kUscThreshold * cfg.omega0;
    json summary = {{"usc_threshold", threshold},
                    {"max_closed_form_deviation", closed},
                    {"max_particle_hole_residual", symmetry},
                    {"omega_cp", nullptr},
                    {"order", "usc_first"}};
    if (b.at("critical_coupling").get<bool>()) {
        regimes::CriticalOptions opt;
        opt.require_convergence = false;
        opt.threads = threads;
        try {
            const auto r = regimes::critical_coupling(cfg, num(b, "ratio"), num(b, "gamma1_max"),
                                                      num(b, "tol"), opt);
            summary["omega_cp"] = r.omega_cp;
            summary["omega_cp_converged"] = r.converged;
            summary["order"] = r.omega_cp < threshold ? "easc_first" : "usc_first";
        } catch (const Error& e) {
            // No finite Ω_CP (flat spectra, EI off): the ultrastrong regime comes first.
            if (e.code() != ErrorCode::Unbounded && e.code() != ErrorCode::NotConverged) throw;
            summary["omega_cp_note"] = std::string(to_string(e.code()));
        }
    }
    write_json(dir / "usc.json", summary);
    return {"usc.csv", "usc.json"};
}

using Runner = Outputs (*)(const model::SystemConfig&, const json&, unsigned, const fs::path&);

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> r = {
        {"trajectory", run_trajectory}, {"phase-diagram", run_phase_diagram},
        {"critical-coupling", run_critical}, {"energy-map", run_energy_map},
        {"splitting", run_splitting},   {"dynamics", run_dynamics},
        {"oracle", run_oracle},         {"usc", run_usc}};
    return r;
}

void check_subcommand(const std::string& sub) {
    if (!runners().count(sub)) invalid("unknown subcommand '" + sub + "'");
}

json error_json(const std::string& code, const std::string& message, int exit_code) {
    return {{"error", code}, {"message", message}, {"exit_code", exit_code}};
}

} // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s = {"trajectory", "phase-diagram", "critical-coupling",
                                               "energy-map", "splitting",     "dynamics",
                                               "oracle",     "usc"};
    return s;
}

std::string block_name(const std::string& subcommand) {
    std::string s = subcommand;
    for (auto& c : s) {
        if (c == '-') c = '_';
    }
    return s;
}

void apply_overrides(json& raw, const std::vector<std::string>& overrides) {
    if (raw.is_null()) raw = json::object();
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) invalid("override '" + o + "' is not key=value");
        const std::string key = o.substr(0, eq);
        const std::string text = o.substr(eq + 1);
        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) value = text;

        json* node = &raw;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
            if (part.empty()) invalid("override key '" + key + "' has an empty component");
            if (!node->is_object()) invalid("override '" + key + "' descends into a non-object");
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            if (node->is_null()) *node = json::object();
            start = dot + 1;
        }
    }
}

json resolve_config(const std::string& subcommand, const json& raw, const fs::path& base_dir) {
    check_subcommand(subcommand);
    if (!raw.is_object()) invalid("config must be a JSON object");
    const auto& blocks = block_defaults();
    for (const auto& [k, v] : raw.items()) {
        const bool known = std::find(kPhysicalKeys.begin(), kPhysicalKeys.end(), k) != kPhysicalKeys.end() ||
                           k == "parallelism" || k == "seed" || k == "manifest" || blocks.count(k);
        if (!known) invalid("unknown key '" + k + "'");
        if (blocks.count(k)) merge_block(k, v); // every block present is checked
    }

    const auto cfg = system_from_json(raw, base_dir);
    cfg.validate();

    json out = to_json(cfg);
    unsigned parallelism = default_thread_count();
    if (raw.contains("parallelism")) {
        const auto& p = raw["parallelism"];
        if (!p.is_number_integer() || p.get<long long>() < 1 || p.get<long long>() > 4096) {
            invalid("parallelism must be an integer in [1, 4096]");
        }
        parallelism = p.get<unsigned>();
    }
    out["parallelism"] = parallelism;
    std::uint64_t seed = 0;
    if (raw.contains("seed")) {
        if (!raw["seed"].is_number_unsigned()) invalid("seed must be a non-negative integer");
        seed = raw["seed"].get<std::uint64_t>();
    }
    out["seed"] = seed;
    const auto name = block_name(subcommand);
    out[name] = merge_block(name, raw.contains(name) ? raw[name] : json::object());
    return out;
}

void execute(const std::string& subcommand, const json& resolved, const fs::path& out_dir) {
    check_subcommand(subcommand);
    const auto cfg = system_from_json(resolved, fs::current_path());
    const auto name = block_name(subcommand);
    const unsigned threads = thread_count(resolved);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());
    const fs::path staging = out_dir / (".partial-" + name);
    fs::remove_all(staging, ec);
    fs::create_directories(staging);
    try {
        auto outputs = runners().at(subcommand)(cfg, resolved.at(name), threads, staging);
        json manifest = resolved;
        manifest["manifest"] = {{"tool", "easc"},
                                {"version", kVersion},
                                {"subcommand", subcommand},
                                {"threads", threads},
                                {"outputs", outputs}};
        write_json(staging / "manifest.json", manifest);
        outputs.push_back("manifest.json");
        for (const auto& f : outputs) fs::rename(staging / f, out_dir / f);
        fs::remove_all(staging);
        fs::remove(out_dir / "error.json", ec);
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Coupled lossy oscillators with structured reservoirs"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    static const std::map<std::string, std::string> about = {
        {"trajectory", "eigenfrequencies along a coupling sweep"},
        {"phase-diagram", "WC/SC classification over a (gamma1, coupling) grid"},
        {"critical-coupling", "supremum of the transition coupling over a rate ladder"},
        {"energy-map", "interaction energies of both eigenmodes over the grid"},
        {"splitting", "real eigenfrequency splitting along a coupling sweep"},
        {"dynamics", "amplitude and master-equation time evolution"},
        {"oracle", "microscopic bath simulation against the effective generator"},
        {"usc", "counter-rotating and diamagnetic corrections"}};
    for (const auto& sub : subcommands()) {
        auto* s = app.add_subcommand(sub, about.at(sub));
        s->add_option("--config", config_path, "JSON run config");
        s->add_option("--set", overrides, "override key=value (dotted keys reach blocks)");
        s->add_option("--out", out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << error_json("Usage", e.what(), 2).dump() << '\n';
        return 2;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    auto report = [&](const std::string& code, const std::string& msg, int exit_code) {
        const json j = error_json(code, msg, exit_code);
        std::cerr << j.dump() << '\n';
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!ec) std::ofstream(fs::path(out_dir) / "error.json") << j.dump(2) << '\n';
        return exit_code;
    };

    try {
        json raw = json::object();
        fs::path base = fs::current_path();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorCode::Io, "cannot open config " + config_path);
            raw = json::parse(in);
            base = fs::absolute(config_path).parent_path();
        }
        apply_overrides(raw, overrides);
        execute(sub, resolve_config(sub, raw, base), out_dir);
        return 0;
    } catch (const Error& e) {
        return report(std::string(to_string(e.code())), e.what(), is_validation(e.code()) ? 2 : 3);
    } catch (const json::exception& e) {
        return report("Validation", e.what(), 2);
    } catch (const std::exception& e) {
        return report("Internal", e.what(), 3);
    }
}

} // namespace easc::cli
