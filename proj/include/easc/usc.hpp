// usc.hpp: Counter-rotating and diamagnetic corrections to the coupled pair
//
// Mean-field equations for (⟨a₁⟩, ⟨a₂⟩, ⟨a₁†⟩, ⟨a₂†⟩) with H_CRW = Ω(a₁†a₂† + a₁a₂)
// and H_dia = D Σ (aⱼ† + aⱼ)², D = Ω²/ω₀. No dissipation.

#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace easc::usc {

using Matrix4cd = Eigen::Matrix<std::complex<double>, 4, 4>;
using Vector4cd = Eigen::Matrix<std::complex<double>, 4, 1>;

// Conventional onset of the ultrastrong regime, in units of ω₀.
inline constexpr double kUscThreshold = 0.1;

struct UscGenerator {
    Matrix4cd m4;
};

// Requires 0 ≤ Ω < ω₀/2.
UscGenerator build_usc_generator(double omega0, double coupling);

// Σ swaps the (a₁,a₂) and (a₁†,a₂†) blocks. Returns max |m4 − Σ·conj(m4)·Σ|.
double particle_hole_residual(const UscGenerator& g);

struct UscFrequencies {
    double rwa_s{0.0}, rwa_a{0.0};     // ω₀ ± Ω
    double closed_s{0.0}, closed_a{0.0}; // sqrt(ω₀² ± 2Ωω₀ + 4Ω²)
    double full_s{0.0}, full_a{0.0};   // numeric, positive-frequency branch
    Vector4cd vector_s, vector_a;      // unit norm, phase fixed by the a-block sum
};

UscFrequencies usc_eigenfrequencies(double omega0, double coupling);

struct UscDeviation {
    double coupling{0.0};
    double rwa_s{0.0}, rwa_a{0.0};
    double full_s{0.0}, full_a{0.0};
    double shift_s{0.0}, shift_a{0.0}; // (full − rwa)/(2Ω); 0 at Ω = 0
    double overlap_s{0.0}, overlap_a{0.0}; // |⟨RWA state, 0, 0 | full state⟩|
};

std::vector<UscDeviation> usc_deviation_report(double omega0, const std::vector<double>& couplings);

// omega_coupling,w_rwa_s,w_rwa_a,w_full_s,w_full_a,overlap_s,overlap_a
void write_usc_csv(const std::filesystem::path& path, const std::vector<UscDeviation>& rows);

} // namespace easc::usc
