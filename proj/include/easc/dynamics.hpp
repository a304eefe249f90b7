// dynamics.hpp: Amplitude equations and the zero-temperature master equation on
// the single-excitation subspace
//
// Density matrices use the ordered basis (|1,0⟩, |0,1⟩, |0,0⟩).

#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "easc/model.hpp"

namespace easc::dynamics {

using model::SystemConfig;
using cd = std::complex<double>;

using DensityMatrix3 = Eigen::Matrix3cd;
using Superoperator = Eigen::Matrix<cd, 9, 9>;

inline constexpr double kMaxStep = 0.05; // in 1/ω₀

struct AmplitudeState {
    cd a1{0.0, 0.0};
    cd a2{0.0, 0.0};
    double t{0.0};
};

struct IntegrationOptions {
    double dt{0.01};
    std::size_t store_every{10};
    // Integrate with the e^{−iω₀t} carrier removed; stored results are always
    // converted back to the lab frame.
    bool rotating_frame{false};
};

// RK4 on da/dt = M a. The first stored state is the initial one; the final
// time is always stored.
std::vector<AmplitudeState> evolve_amplitudes(const SystemConfig& config,
                                              const AmplitudeState& initial, double t_end,
                                              const IntegrationOptions& options = {});

// a(t) = exp(M t) a(0).
AmplitudeState propagate_exact(const SystemConfig& config, const AmplitudeState& initial,
                               double t);

struct Liouvillian {
    Superoperator matrix; // acts on column-major vec(ρ)

    DensityMatrix3 apply(const DensityMatrix3& rho) const;
};

Liouvillian build_liouvillian(const SystemConfig& config);

// The map (⟨a₁⟩, ⟨a₂⟩) → d/dt (⟨a₁⟩, ⟨a₂⟩) implied by the Liouvillian.
Eigen::Matrix2cd induced_amplitude_generator(const Liouvillian& l);

// Single-excitation operators on the 3-state basis.
Eigen::Matrix3cd lowering_operator(model::Oscillator which);

struct Observables {
    double t{0.0};
    double e1{0.0};
    double e2{0.0};
    double x{0.0};
    double re_rho_1001{0.0};
};

Observables observables(const DensityMatrix3& rho, double t);
Observables observables(const AmplitudeState& a);

DensityMatrix3 excited_first();

// Throws Validation when ρ is not Hermitian, unit trace and PSD within 1e-9.
void check_density_matrix(const DensityMatrix3& rho);

struct DensityEvolution {
    std::vector<double> times;
    std::vector<DensityMatrix3> states;
    std::vector<Observables> observables;
    double max_trace_drift{0.0};
    double min_eigenvalue{0.0};
    // Stored samples with an eigenvalue below −1e-9 (logged, never clipped).
    std::size_t positivity_violations{0};
};

DensityEvolution evolve_density_matrix(const SystemConfig& config, const DensityMatrix3& rho0,
                                       double t_end, const IntegrationOptions& options = {});

struct ComparisonReport {
    double max_e_deviation{0.0};
    double max_x_deviation{0.0};
    double max_abs_x_master{0.0};
    double max_abs_x_amplitude{0.0};
    double max_abs_re_rho_1001{0.0};
};

// Sample-by-sample comparison of two runs on the same step plan.
ComparisonReport compare_series(const std::vector<AmplitudeState>& amplitudes,
                                const DensityEvolution& master);

// Both pictures from |1,0⟩.
ComparisonReport compare_amplitude_vs_master(const SystemConfig& config, double t_end,
                                             const IntegrationOptions& options = {});

void write_amplitudes_csv(const std::filesystem::path& path,
                          const std::vector<AmplitudeState>& series);
void write_observables_csv(const std::filesystem::path& path,
                           const std::vector<Observables>& series);

} // namespace easc::dynamics
