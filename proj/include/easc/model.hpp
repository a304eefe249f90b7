// model.hpp: Reservoir spectra, system configuration and frequency-dependent rates
//
// All frequencies are expressed in units of the oscillator frequency ω₀, so the
// spectrum's reference point is ω = 1. A spectrum only carries the relative
// shape r(ω) with r(1) = 1; the physical rate at ω₀ comes from SystemConfig.

#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace easc::model {

struct FlatSpectrum {};

struct PowerLawSpectrum {
    double exponent{0.0};
};

// Monotone-cubic (Fritsch–Carlson) interpolant of tabulated relative densities.
struct TabulatedSpectrum {
    std::vector<double> frequencies;
    std::vector<double> densities; // rescaled so that r(1) = 1
    std::vector<double> slopes;    // Hermite node derivatives
};

class ReservoirSpectrum {
public:
    using Variant = std::variant<FlatSpectrum, PowerLawSpectrum, TabulatedSpectrum>;

    ReservoirSpectrum() = default;

    static ReservoirSpectrum flat();
    static ReservoirSpectrum power_law(double exponent);
    // Samples are (frequency in ω₀ units, relative density). Must be strictly
    // increasing in frequency, non-negative, and bracket ω = 1.
    static ReservoirSpectrum tabulated(const std::vector<std::pair<double, double>>& samples);

    double density(double omega) const;
    double derivative(double omega) const;

    // Frequency range over which density() is defined.
    std::pair<double, double> band() const;
    bool covers(double lo, double hi) const;

    // True when r(ω) is constant (flat, n = 0, or a constant table).
    bool is_flat() const;
    std::optional<double> power_law_exponent() const;

    std::string describe() const;
    const Variant& variant() const noexcept { return v_; }

private:
    explicit ReservoirSpectrum(Variant v) : v_(std::move(v)) {}
    Variant v_{FlatSpectrum{}};
};

// Two-column CSV with header `omega,rho`.
ReservoirSpectrum load_spectrum_csv(const std::filesystem::path& path);
void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<std::pair<double, double>>& samples);

double relative_density(const ReservoirSpectrum& spectrum, double omega);

// γ(ω) = γ(ω₀)·r(ω)
double rate_at(double gamma_ref, const ReservoirSpectrum& spectrum, double omega);

enum class EiMode { Off, ExactDifference, GradientApprox };
enum class DiagonalMode { AveragedRates, RateAtOmega0 };
enum class Oscillator { First, Second };

std::string to_string(EiMode mode);
std::string to_string(DiagonalMode mode);
EiMode parse_ei_mode(const std::string& text);
DiagonalMode parse_diagonal_mode(const std::string& text);

struct SystemConfig {
    double omega0{1.0};
    double coupling{0.0}; // Ω
    double gamma1{0.0};
    double gamma2{0.0};
    ReservoirSpectrum spectrum1{};
    ReservoirSpectrum spectrum2{};
    EiMode ei_mode{EiMode::ExactDifference};
    DiagonalMode diagonal_mode{DiagonalMode::AveragedRates};

    double gamma(Oscillator which) const { return which == Oscillator::First ? gamma1 : gamma2; }
    const ReservoirSpectrum& spectrum(Oscillator which) const {
        return which == Oscillator::First ? spectrum1 : spectrum2;
    }

    // Throws Error(Validation / OutOfBand) when an invariant is broken.
    void validate() const;

    SystemConfig with_coupling(double omega) const;
    SystemConfig with_rates(double g1, double g2) const;
};

// Eigenfrequency ω = re + i·im; passive systems have im ≤ 0.
struct ComplexFrequency {
    double re{0.0};
    double im{0.0};

    std::complex<double> value() const { return {re, im}; }
    static ComplexFrequency from(std::complex<double> z) { return {z.real(), z.imag()}; }
};

} // namespace easc::model
