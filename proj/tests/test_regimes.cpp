#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "easc/error.hpp"
#include "easc/regimes.hpp"
#include "easc/spectral.hpp"

using namespace easc;
using namespace easc::regimes;
using model::EiMode;
using model::ReservoirSpectrum;

namespace {

SystemConfig make(double n, double g1, double g2, EiMode ei = EiMode::ExactDifference) {
    SystemConfig c;
    c.gamma1 = g1;
    c.gamma2 = g2;
    c.spectrum1 = c.spectrum2 = n == 0.0 ? ReservoirSpectrum::flat() : ReservoirSpectrum::power_law(n);
    c.ei_mode = ei;
    return c;
}

ErrorCode code_of(const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an easc::Error");
    return ErrorCode::Io;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

std::vector<double> geomspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return v;
}

const std::filesystem::path kSource = EASC_SOURCE_DIR;

} // namespace

TEST_CASE("transition without EI is the exceptional point") {
    CHECK(transition_coupling(make(2, 0.02, 0.01, EiMode::Off), 0.0, 0.1) ==
          doctest::Approx(0.005).epsilon(1e-10));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 0.1);
    for (int k = 0; k < 100; ++k) {
        const double g1 = u(rng);
        const double g2 = u(rng);
        const double ep = std::abs(g1 - g2) / 2.0;
        const double w = transition_coupling(make(2, g1, g2, EiMode::Off), 0.0, 0.1);
        CHECK(std::abs(w - ep) <= 1e-10 * std::max(ep, 1e-3));
    }
}

TEST_CASE("EI coupling pulls the transition below the exceptional point") {
    const double w = transition_coupling(make(2, 0.02, 0.01), 0.0, 0.1);
    CHECK(w < 0.005);
    CHECK(w == doctest::Approx(0.0049931320781800).epsilon(1e-6));
}

TEST_CASE("equal rates transition at zero") {
    CHECK(transition_coupling(make(2, 0.01, 0.01, EiMode::Off), 0.0, 0.1) == 0.0);
    CHECK(transition_coupling(make(0, 0.01, 0.01), 0.0, 0.1) == 0.0);
}

TEST_CASE("monotone band has no interior minimum") {
    // flat, EP at 0.05 but band stops at 0.02: Δ decreases to the upper edge
    CHECK(code_of([] { transition_coupling(make(0, 0.1, 0.0), 0.0, 0.02); }) == ErrorCode::NoInteriorMinimum);
    const auto s = locate_transition(make(0, 0.1, 0.0), 0.0, 0.02);
    CHECK(s.edge == BandEdge::Upper);
}

TEST_CASE("phase diagram without EI follows the EP line") {
    const auto gs = geomspace(1e-3, 0.1, 21);
    const auto ws = linspace(0.0, 0.1, 101);
    const auto pd = phase_diagram(make(2, 0, 0, EiMode::Off), gs, 2.0, ws, 4);
    REQUIRE(pd.rows.size() == gs.size());
    for (const auto& row : pd.rows) {
        REQUIRE_FALSE(row.no_interior_minimum);
        CHECK(row.search.omega == doctest::Approx(row.gamma1 / 2.0).epsilon(1e-9));
        for (std::size_t j = 0; j < ws.size(); ++j) {
            const bool sc = ws[j] > row.search.omega;
            CHECK((row.cells[j].regime == Regime::SC) == sc);
        }
    }
}

TEST_CASE("phase diagram with quadratic spectrum") {
    const auto gs = geomspace(1e-4, 10.0, 201); // the boundary peaks near 0.2, so saturation needs a decade past 1
    const auto ws = linspace(0.0, 0.1, 201);
    const auto pd = phase_diagram(make(2, 0, 0), gs, 2.0, ws, 4);
    for (const auto& [g, w] : pd.boundary) {
        if (g <= 0.02) CHECK(std::abs(w - g / 2.0) <= 0.05 * g / 2.0);
        if (g >= 1e-3) CHECK(w < g / 2.0);
    }
    REQUIRE(pd.omega_cp.has_value());
    CHECK(pd.converged);
    CHECK(pd.saturation_change < 0.01);
    CHECK(*pd.omega_cp == doctest::Approx(5.934318e-2).epsilon(2e-3));

    // each row is single-valued and splits WC below from SC above
    for (const auto& row : pd.rows) {
        if (row.no_interior_minimum) continue;
        for (std::size_t j = 0; j < ws.size(); ++j) {
            CHECK((row.cells[j].regime == Regime::SC) == (ws[j] > row.search.omega));
        }
    }

    // EASC: past Ω_CP every γ row stays strongly coupled
    for (const auto& row : pd.rows) {
        for (std::size_t j = 0; j < ws.size(); ++j) {
            if (ws[j] > *pd.omega_cp) CHECK(row.cells[j].regime == Regime::SC);
        }
    }
}

TEST_CASE("phase diagram is independent of thread count") {
    const auto gs = geomspace(1e-3, 0.5, 17);
    const auto ws = linspace(0.0, 0.1, 31);
    const auto a = phase_diagram(make(2, 0, 0), gs, 2.0, ws, 1);
    const auto b = phase_diagram(make(2, 0, 0), gs, 2.0, ws, 7);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].search.omega == b.rows[i].search.omega);
        for (std::size_t j = 0; j < ws.size(); ++j) {
            CHECK(a.rows[i].cells[j].delta == b.rows[i].cells[j].delta);
        }
    }
}

TEST_CASE("interaction energy maps") {
    const auto gs = geomspace(1e-3, 0.3, 15);
    const auto ws = linspace(0.0, 0.1, 41);
    const auto flat = phase_diagram(make(0, 0, 0), gs, 2.0, ws);
    for (const auto& row : flat.rows) {
        for (std::size_t j = 0; j < ws.size(); ++j) {
            if (row.cells[j].regime != Regime::WC) continue;
            CHECK(row.cells[j].interaction_energy_1 == 0.0);
            CHECK(row.cells[j].interaction_energy_2 == 0.0);
        }
    }
    const auto quad = phase_diagram(make(2, 0, 0), gs, 2.0, ws);
    for (const auto& row : quad.rows) {
        for (std::size_t j = 1; j < ws.size(); ++j) {
            CHECK(row.cells[j].interaction_energy_1 != 0.0);
            CHECK(row.cells[j].interaction_energy_2 != 0.0);
        }
    }
}

TEST_CASE("critical coupling table") {
    CriticalOptions opt;
    opt.threads = 4;
    const double expected[] = {1.195732e-1, 5.934318e-2, 3.943172e-2, 2.952063e-2};
    double last = 1.0;
    for (int n = 1; n <= 4; ++n) {
        const auto r = critical_coupling(make(n, 0, 0), 2.0, 1.0, 1e-3, opt);
        CHECK(r.converged);
        CHECK(r.omega_cp == doctest::Approx(expected[n - 1]).epsilon(1e-5));
        CHECK(r.omega_cp <= last);
        last = r.omega_cp;
    }
}

TEST_CASE("critical coupling errors") {
    CHECK(code_of([] { critical_coupling(make(0, 0, 0), 2.0, 1.0, 1e-3); }) == ErrorCode::Unbounded);
    CHECK(code_of([] { critical_coupling(make(2, 0, 0, EiMode::Off), 2.0, 1.0, 1e-3); }) == ErrorCode::Unbounded);
    // ladder stops while the boundary is still rising
    CHECK(code_of([] { critical_coupling(make(2, 0, 0), 2.0, 0.01, 1e-3); }) == ErrorCode::NotConverged);
    CriticalOptions lax;
    lax.require_convergence = false;
    const auto r = critical_coupling(make(2, 0, 0), 2.0, 0.01, 1e-3, lax);
    CHECK_FALSE(r.converged);
    CHECK(r.omega_cp > 0.0);
}

TEST_CASE("stopped light spectrum") {
    SystemConfig c;
    c.spectrum1 = c.spectrum2 = model::load_spectrum_csv(kSource / "tests/data/stopped_light.csv");
    CHECK(c.spectrum1.derivative(1.0) == doctest::Approx(1e3).epsilon(1e-3));
    CriticalOptions opt;
    opt.threads = 4;
    const auto r = critical_coupling(c, 2.0, 1e-2, 1e-3, opt);
    CHECK(r.converged);
    CHECK(r.omega_cp > 1e-4 / 3.0);
    CHECK(r.omega_cp < 3e-4);
}

TEST_CASE("real splitting curve") {
    const auto off = real_splitting_curve(make(0, 0.01, 0.02, EiMode::Off), 0.0, 0.1, 1001);
    for (const auto& p : off) {
        const double want = p.coupling < 0.005 ? 0.0 : 2.0 * std::sqrt(std::max(p.coupling * p.coupling - 2.5e-5, 0.0));
        CHECK(std::abs(p.splitting - want) <= 1e-8); // sqrt(eps) rounding at the EP itself
    }
    CHECK(off[50].splitting < 1e-8);
    CHECK(off[100].splitting == doctest::Approx(0.017320508075688773).epsilon(1e-12));
    CHECK(off[500].splitting == doctest::Approx(0.099498743710662).epsilon(1e-12));
    const auto quad = real_splitting_curve(make(2, 0.01, 0.02), 0.0, 0.1, 1001);
    CHECK(quad.front().splitting == 0.0);
    for (std::size_t i = 1; i < quad.size(); ++i) {
        CHECK(quad[i].splitting > 0.0);
        CHECK(quad[i].splitting > off[i].splitting);
    }
}

TEST_CASE("phase diagram outputs") {
    const auto dir = std::filesystem::temp_directory_path() / "easc_test_regimes";
    std::filesystem::create_directories(dir);
    const auto pd = phase_diagram(make(2, 0, 0), geomspace(1e-3, 0.5, 5), 2.0, linspace(0, 0.1, 4));
    write_phase_diagram_csv(dir / "pd.csv", pd);
    write_phase_diagram_summary(dir / "pd.json", pd);
    std::ifstream in(dir / "pd.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "gamma1,omega,regime,delta,e_int_1,e_int_2");
    const auto j = nlohmann::json::parse(std::ifstream(dir / "pd.json"));
    CHECK(j.contains("boundary"));
    CHECK(j.contains("omega_cp"));
    CHECK(j.contains("converged"));
    std::filesystem::remove_all(dir);
}
