#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "easc/error.hpp"
#include "easc/model.hpp"
#include "easc/serialize.hpp"

using namespace easc;
using namespace easc::model;

namespace {

ErrorCode code_of(const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an easc::Error");
    return ErrorCode::Io;
}

ReservoirSpectrum three_point() { return ReservoirSpectrum::tabulated({{0.9, 2.0}, {1.0, 4.0}, {1.1, 6.0}}); }

} // namespace

TEST_CASE("relative density basics") {
    CHECK(relative_density(ReservoirSpectrum::flat(), 1.37) == 1.0);
    CHECK(relative_density(ReservoirSpectrum::power_law(2), 1.08) == doctest::Approx(1.1664).epsilon(1e-15));
    CHECK(relative_density(three_point(), 1.0) == 1.0);
}

TEST_CASE("rate_at") {
    CHECK(rate_at(0.001, ReservoirSpectrum::power_law(2), 1.08) == doctest::Approx(0.0011664).epsilon(1e-14));
    CHECK(rate_at(0.02, ReservoirSpectrum::flat(), 0.5) == 0.02);
    CHECK(rate_at(0.0, ReservoirSpectrum::power_law(3), 1.2) == 0.0);
}

TEST_CASE("tabulated errors") {
    CHECK(code_of([] { relative_density(three_point(), 1.2); }) == ErrorCode::OutOfBand);
    CHECK(code_of([] { relative_density(three_point(), 0.85); }) == ErrorCode::OutOfBand);
    CHECK(code_of([] { ReservoirSpectrum::tabulated({{0.9, 1.0}, {1.0, -0.5}, {1.1, 1.0}}); }) ==
          ErrorCode::NegativeDensity);
    CHECK(code_of([] { ReservoirSpectrum::tabulated({{0.9, 1.0}, {0.9, 1.0}, {1.1, 1.0}}); }) ==
          ErrorCode::Validation);
}

TEST_CASE("tabulated reproduces samples and stays non-negative") {
    const auto s = ReservoirSpectrum::tabulated({{0.8, 0.0}, {0.9, 3.0}, {1.0, 0.1}, {1.1, 5.0}, {1.2, 0.0}});
    const double scale = 0.1; // value at 1.0
    CHECK(s.density(0.9) == doctest::Approx(3.0 / scale).epsilon(1e-14));
    CHECK(s.density(1.1) == doctest::Approx(5.0 / scale).epsilon(1e-14));
    CHECK(s.density(0.8) == 0.0);
    for (int i = 0; i <= 4000; ++i) {
        const double w = (0.8 * (4000 - i) + 1.2 * i) / 4000.0; // lands on both ends exactly
        REQUIRE(s.density(w) >= 0.0);
    }
}

TEST_CASE("rate invariants over random spectra") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double n = 4.0 * u(rng);
        const double g = 0.05 * u(rng);
        const auto s = ReservoirSpectrum::power_law(n);
        CHECK(rate_at(g, s, 1.0) == g);
        for (int j = 0; j < 10; ++j) {
            const double w = 0.5 + u(rng);
            CHECK(rate_at(g, s, w) >= 0.0);
        }
    }
    for (double w : {0.3, 0.77, 1.0, 1.4, 1.9}) {
        CHECK(relative_density(ReservoirSpectrum::power_law(0), w) == relative_density(ReservoirSpectrum::flat(), w));
    }
}

TEST_CASE("spectrum csv round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "easc_test_model";
    std::filesystem::create_directories(dir);
    const auto path = dir / "rho.csv";
    write_spectrum_csv(path, {{0.9, 2.0}, {1.0, 4.0}, {1.1, 6.0}});
    const auto s = load_spectrum_csv(path);
    CHECK(s.density(1.0) == 1.0);
    CHECK(s.density(1.1) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(code_of([&] { load_spectrum_csv(dir / "missing.csv"); }) == ErrorCode::Io);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config validation") {
    SystemConfig c;
    c.gamma1 = 0.02;
    c.gamma2 = 0.01;
    c.coupling = 0.05;
    CHECK_NOTHROW(c.validate());
    c.gamma1 = -0.1;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::Validation);
    c.gamma1 = 0.02;
    c.coupling = 1.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::Validation);
    c.coupling = 0.2;
    c.spectrum1 = three_point();
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::OutOfBand);
    c.ei_mode = EiMode::Off;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config json round trip") {
    SystemConfig c;
    c.coupling = 0.03;
    c.gamma1 = 0.004;
    c.spectrum1 = ReservoirSpectrum::power_law(2.5);
    c.spectrum2 = three_point();
    c.ei_mode = EiMode::GradientApprox;
    const auto back = system_from_json(to_json(c), ".");
    CHECK(to_json(back) == to_json(c));
    CHECK(back.spectrum2.density(1.05) == doctest::Approx(c.spectrum2.density(1.05)).epsilon(1e-14));
    CHECK(code_of([] { spectrum_from_json({{"kind", "power_law"}, {"n", 2}}, "."); }) == ErrorCode::Validation);
    CHECK(code_of([] { spectrum_from_json("lorentzian", "."); }) == ErrorCode::Validation);
}
