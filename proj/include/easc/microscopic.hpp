// microscopic.hpp: Brute-force oracle: two classical oscillators coupled to
// explicitly discretized reservoirs
//
//   ẍⱼ = −ω_b² xⱼ − κ² x_other + Σₖ cₖ yⱼₖ
//   ÿⱼₖ = −ωₖ² yⱼₖ + cₖ xⱼ
//
// with κ² = 2Ωω₀. Effective rates and the EI coupling are recovered by
// demodulating x₁,₂ at ω₀ and fitting ȧ = M a.

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "easc/model.hpp"

namespace easc::microscopic {

using model::ReservoirSpectrum;
using model::SystemConfig;

inline constexpr std::size_t kMinModes = 500;

struct DiscretizedReservoir {
    std::vector<double> mode_frequencies; // midpoints lo + (k + ½)Δω
    std::vector<double> mode_couplings;   // g_k with π g_k²/Δω = γ r(ω_k)
    std::vector<double> eom_couplings;    // c_k = 2 ω_k g_k, as used in the equations of motion
    double target_gamma{0.0};
    double spacing{0.0};
    double band_lo{0.0};
    double band_hi{0.0};
    double recurrence_time{0.0}; // 2π/Δω

    // Principal-value frequency pull Σₖ cₖ²/(ωₖ² − ω²).
    double frequency_pull(double omega) const;
};

// Frequencies in the same units as ω₀ (spectrum evaluated at ω/ω₀).
DiscretizedReservoir discretize_reservoir(const ReservoirSpectrum& spectrum, double target_gamma,
                                          double band_lo, double band_hi, std::size_t mode_count,
                                          double omega0 = 1.0);

struct MicroSystem {
    double omega0{1.0};
    double coupling{0.0}; // Ω; κ² = 2Ωω₀
    DiscretizedReservoir reservoir1;
    DiscretizedReservoir reservoir2;
    // Bare frequencies raised so that the bath-dressed normal modes sit at
    // ω₀ ± Ω (otherwise the reservoir pulls them by its principal-value shift).
    bool renormalize{true};

    double kappa_squared() const { return 2.0 * coupling * omega0; }
    double bare_frequency_squared(model::Oscillator which) const;
};

struct MicroState {
    double x1{0.0}, x2{0.0}, v1{0.0}, v2{0.0};
    std::vector<double> y1, u1, y2, u2; // bath coordinates and velocities
};

// Oscillator displacement/velocity as given, baths at rest.
MicroState initial_state(const MicroSystem& sys, double x1, double v1, double x2 = 0.0,
                         double v2 = 0.0);

double total_energy(const MicroSystem& sys, const MicroState& s);

struct MicroOptions {
    double t_end{400.0};
    double max_dt{0.01};
    // Bath modes of either reservoir must not violate the margin rule around
    // [ω₀ − Ω, ω₀ + Ω]; disable only for conservative checks.
    bool check_band{true};
};

struct MicroSeries {
    double omega0{1.0};
    double coupling{0.0};
    double dt{0.0};
    std::vector<double> t;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> v1;
    std::vector<double> v2;
    MicroState final_state;
};

// Velocity-Verlet. dt is chosen ≤ max_dt and ≤ 0.02/ω_hi such that one carrier
// period 2π/ω₀ is a whole multiple of 8 steps.
MicroSeries evolve_microscopic(const MicroSystem& sys, const MicroState& initial,
                               const MicroOptions& options);

// Step used by evolve_microscopic for these settings.
double carrier_locked_step(double omega0, double max_dt, double omega_hi);

struct Envelope {
    std::vector<double> t;
    std::vector<std::complex<double>> a1;
    std::vector<std::complex<double>> a2;
};

// Rotating-wave amplitudes a₁,₂ = (b ± c)/√2 built from the normal-mode
// amplitudes b, c = (ωX + iV)/√2 of the symmetric/antisymmetric coordinates at
// ω₀ ± Ω. This weighting makes the bath-induced b-c cross terms those of the
// amplitude equations; x-only demodulation is off by a similarity
// diag(1 ± Ω/2ω₀), which is the size of K itself. Then multiply by e^{iω₀t}, low-pass with three
// cascaded boxcars of 2.5 carrier periods (cutoff ≈ ω₀/10, exact nulls at 2ω₀),
// keep fully-supported samples and decimate to 8 samples per carrier period.
Envelope demodulate(const MicroSeries& series);

struct GeneratorFit {
    Eigen::Matrix2cd m;     // lab frame, comparable to spectral::build_generator
    double residual{0.0};   // ‖Ȧ − MA‖/‖Ȧ‖ over the window
    double t_start{0.0};
    double t_stop{0.0};
};

// Least squares on the envelope over [t_start, t_stop] (clipped to the
// envelope). Throws PoorFit when the residual exceeds 5%.
GeneratorFit extract_effective_generator(const MicroSeries& series, double t_start,
                                         double t_stop);
GeneratorFit fit_envelope(const Envelope& env, double omega0, double t_start, double t_stop);

// Amplitude decay rate of oscillator 1 from a log-linear fit of |a₁(t)|.
double fit_decay_rate(const MicroSeries& series, double t_start, double t_stop);

struct OracleOptions {
    std::size_t mode_count{4000};
    double band_lo{0.4};
    double band_hi{1.6};
    double max_dt{0.01};
    double t_end{400.0};
    double fit_start{40.0};
};

struct OracleComponent {
    double fitted{0.0};
    double predicted{0.0};
    double relative_error{0.0};
    double tolerance{0.0};
    bool pass{false};
};

struct OracleReport {
    SystemConfig config;
    OracleOptions options;
    Eigen::Matrix2cd fitted;
    Eigen::Matrix2cd predicted;
    double residual{0.0};
    double recurrence_time{0.0};
    // decay_1/2: −Re M_jj vs γ̄ⱼ; ei_1/2: −Re M_12/M_21 vs K (vs Ω when K = 0);
    // rabi_1/2: −Im M_12/M_21 vs Ω; frequency_1/2: −Im M_jj vs ω₀.
    std::vector<std::pair<std::string, OracleComponent>> components;
    bool pass{false};
};

OracleReport run_oracle(const SystemConfig& config, const OracleOptions& options = {});

void write_oracle_json(const std::filesystem::path& path, const std::vector<OracleReport>& reports);

} // namespace easc::microscopic
