// spectral.hpp: Effective 2×2 amplitude generator, eigenfrequencies and trajectories
//
// Amplitudes obey da/dt = M a. An eigenvalue λ of M corresponds to the
// eigenfrequency ω = iλ, so Re ω is the oscillation frequency and −Im ω the decay.

#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "easc/model.hpp"

namespace easc::spectral {

using model::ComplexFrequency;
using model::Oscillator;
using model::SystemConfig;

struct EffectiveGenerator {
    Eigen::Matrix2cd m;
    double k1{0.0};
    double k2{0.0};
    double coupling{0.0}; // Ω, needed for interaction energies
};

struct EigenDecomposition {
    std::array<ComplexFrequency, 2> eigenfrequencies;
    std::array<Eigen::Vector2cd, 2> eigenvectors;
    std::array<double, 2> interaction_energies{};
    double delta{0.0};
    // Eigenvectors numerically collinear (angle < 1e-8 rad): an EP.
    bool defective{false};
};

// K(Ω, γⱼ). Zero when ei_mode is Off.
double ei_coupling(const SystemConfig& config, Oscillator which);

// Diagonal decay rate γ̄ⱼ for the configured diagonal mode.
double diagonal_rate(const SystemConfig& config, Oscillator which);

EffectiveGenerator build_generator(const SystemConfig& config);

EigenDecomposition eigendecompose(const EffectiveGenerator& gen);

// Closed-form eigenfrequencies for a power-law pair with the gradient form of K
// and ω₀ diagonal rates, ordered like eigendecompose().
std::array<ComplexFrequency, 2> closed_form_eigenfrequencies(const SystemConfig& config);

double interaction_energy(const Eigen::Vector2cd& eigenvector, double coupling);

// Descending real part, ties by descending imaginary part.
bool frequency_precedes(const ComplexFrequency& a, const ComplexFrequency& b);

struct TrajectoryPoint {
    double coupling{0.0};
    ComplexFrequency w1;
    ComplexFrequency w2;
    Eigen::Vector2cd v1;
    Eigen::Vector2cd v2;
    double delta{0.0};
};

// Uniform Ω grid with branch tracking: successive points are paired by the
// smaller total complex distance, so w1 and w2 are continuous branches.
std::vector<TrajectoryPoint> trajectory(const SystemConfig& config_template, double omega_min,
                                        double omega_max, std::size_t steps, unsigned threads = 1);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryPoint>& points);

} // namespace easc::spectral
