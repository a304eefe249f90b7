#include "easc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "easc/csv.hpp"
#include "easc/error.hpp"
#include "easc/parallel.hpp"

namespace easc::spectral {

using cd = std::complex<double>;
using model::DiagonalMode;
using model::EiMode;

namespace {

constexpr cd I{0.0, 1.0};

// Normalized null vector of the 2×2 matrix A (assumed singular), taken from
// its larger row. A zero matrix yields the supplied fallback.
Eigen::Vector2cd null_vector(const Eigen::Matrix2cd& a, const Eigen::Vector2cd& fallback,
                             double scale) {
    const double n0 = a.row(0).norm();
    const double n1 = a.row(1).norm();
    Eigen::Vector2cd v;
    if (std::max(n0, n1) <= 1e-300 + 1e-15 * scale) {
        v = fallback;
    } else if (n0 >= n1) {
        v << a(0, 1), -a(0, 0);
    } else {
        v << a(1, 1), -a(1, 0);
    }
    return v / v.norm();
}

// Larger-magnitude component real and non-negative; the first wins near-ties.
void fix_phase(Eigen::Vector2cd& v) {
    const double m0 = std::abs(v[0]);
    const double m1 = std::abs(v[1]);
    const cd pivot = (m1 > m0 * (1.0 + 1e-12)) ? v[1] : v[0];
    if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
    // Remove the rounding residue left on the pivot's imaginary part.
    if (m1 > m0 * (1.0 + 1e-12)) {
        v[1] = cd(std::abs(v[1]), 0.0);
    } else {
        v[0] = cd(std::abs(v[0]), 0.0);
    }
}

} // namespace

double ei_coupling(const SystemConfig& config, Oscillator which) {
    if (config.ei_mode == EiMode::Off) return 0.0;
    const auto& s = config.spectrum(which);
    const double g = config.gamma(which);
    const double x = config.coupling / config.omega0;
    if (config.ei_mode == EiMode::GradientApprox) {
        const auto n = s.power_law_exponent();
        if (!n) {
            throw Error(ErrorCode::GradientUnsupported,
                        "gradient form of the EI coupling needs a power-law spectrum");
        }
        return *n * config.coupling * g / config.omega0;
    }
    if (s.is_flat()) return 0.0;
    return g * (s.density(1.0 + x) - s.density(1.0 - x)) / 2.0;
}

double diagonal_rate(const SystemConfig& config, Oscillator which) {
    const double g = config.gamma(which);
    if (config.ei_mode == EiMode::Off || config.diagonal_mode == DiagonalMode::RateAtOmega0) {
        return g;
    }
    const auto& s = config.spectrum(which);
    if (s.is_flat()) return g;
    const double x = config.coupling / config.omega0;
    return g * (s.density(1.0 + x) + s.density(1.0 - x)) / 2.0;
}

EffectiveGenerator build_generator(const SystemConfig& config) {
    config.validate();
    EffectiveGenerator gen;
    gen.coupling = config.coupling;
    gen.k1 = ei_coupling(config, Oscillator::First);
    gen.k2 = ei_coupling(config, Oscillator::Second);
    const double d1 = diagonal_rate(config, Oscillator::First);
    const double d2 = diagonal_rate(config, Oscillator::Second);
    gen.m(0, 0) = -I * config.omega0 - d1;
    gen.m(1, 1) = -I * config.omega0 - d2;
    gen.m(0, 1) = -I * config.coupling - gen.k1;
    gen.m(1, 0) = -I * config.coupling - gen.k2;
    return gen;
}

double interaction_energy(const Eigen::Vector2cd& v, double coupling) {
    return 2.0 * coupling * (std::conj(v[0]) * v[1]).real();
}

bool frequency_precedes(const ComplexFrequency& a, const ComplexFrequency& b) {
    const double tie = 1e-12 * std::max({std::abs(a.re), std::abs(b.re), 1e-300});
    if (std::abs(a.re - b.re) > tie) return a.re > b.re;
    return a.im > b.im;
}

EigenDecomposition eigendecompose(const EffectiveGenerator& gen) {
    const auto& m = gen.m;
    if (!m.allFinite()) throw Error(ErrorCode::Validation, "generator has non-finite entries");
    // Work on the traceless part so the carrier does not cost precision.
    const cd half_trace = (m(0, 0) + m(1, 1)) / 2.0;
    Eigen::Matrix2cd t = m;
    t(0, 0) -= half_trace;
    t(1, 1) -= half_trace;
    const cd q = t(0, 0);
    const cd s = std::sqrt(q * q + t(0, 1) * t(1, 0));
    const double scale = t.norm();

    std::array<cd, 2> lambda{half_trace + s, half_trace - s};
    std::array<cd, 2> shift{s, -s};
    std::array<Eigen::Vector2cd, 2> fallback{Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1)};

    EigenDecomposition out;
    std::array<int, 2> idx{0, 1};
    std::array<ComplexFrequency, 2> w{ComplexFrequency::from(I * lambda[0]),
                                      ComplexFrequency::from(I * lambda[1])};
    if (frequency_precedes(w[1], w[0])) std::swap(idx[0], idx[1]);

    for (int k = 0; k < 2; ++k) {
        const int j = idx[k];
        Eigen::Matrix2cd a = t;
        a(0, 0) -= shift[j];
        a(1, 1) -= shift[j];
        Eigen::Vector2cd v = null_vector(a, fallback[k], scale);
        fix_phase(v);
        out.eigenfrequencies[k] = w[j];
        out.eigenvectors[k] = v;
        out.interaction_energies[k] = interaction_energy(v, gen.coupling);
    }
    out.delta = std::abs(2.0 * s);
    const auto& v1 = out.eigenvectors[0];
    const auto& v2 = out.eigenvectors[1];
    // Rounding in the discriminant leaves Δ ~ sqrt(eps)·scale at an exact EP, so a
    // numerically coalesced pair also counts. M ∝ I (scale 0) is not defective.
    out.defective = std::abs(v1[0] * v2[1] - v1[1] * v2[0]) < 1e-6 ||
                    (scale > 0.0 && out.delta <= 1e-6 * scale);
    return out;
}

std::array<ComplexFrequency, 2> closed_form_eigenfrequencies(const SystemConfig& config) {
    const auto n1 = config.spectrum1.power_law_exponent();
    const auto n2 = config.spectrum2.power_law_exponent();
    if (!n1 || !n2 || *n1 != *n2) {
        throw Error(ErrorCode::ModeMismatch,
                    "closed form needs both reservoirs on the same power law");
    }
    if (config.ei_mode != EiMode::GradientApprox ||
        config.diagonal_mode != DiagonalMode::RateAtOmega0) {
        throw Error(ErrorCode::ModeMismatch,
                    "closed form needs ei_mode=gradient_approx and diagonal_mode=rate_at_omega0");
    }
    config.validate();
    const double n = *n1;
    const double w0 = config.omega0;
    const double o = config.coupling;
    const double g1 = config.gamma1;
    const double g2 = config.gamma2;
    const cd inner = o * o * cd(1.0 - n * n * g1 * g2 / (w0 * w0), -n * (g1 + g2) / w0) -
                     (g1 - g2) * (g1 - g2) / 4.0;
    const cd root = std::sqrt(inner);
    const cd base{w0, -(g1 + g2) / 2.0};
    std::array<ComplexFrequency, 2> w{ComplexFrequency::from(base + root),
                                      ComplexFrequency::from(base - root)};
    if (frequency_precedes(w[1], w[0])) std::swap(w[0], w[1]);
    return w;
}

std::vector<TrajectoryPoint> trajectory(const SystemConfig& config_template, double omega_min,
                                        double omega_max, std::size_t steps, unsigned threads) {
    if (steps < 2) throw Error(ErrorCode::Validation, "trajectory needs at least 2 steps");
    if (!(omega_min >= 0.0) || !(omega_max >= omega_min)) {
        throw Error(ErrorCode::Validation, "trajectory needs 0 <= omega_min <= omega_max");
    }
    if (!(omega_max < config_template.omega0)) {
        throw Error(ErrorCode::Validation, "trajectory needs omega_max < omega0");
    }
    std::vector<TrajectoryPoint> pts(steps);
    parallel_for(steps, threads, [&](std::size_t i) {
        const double o = omega_min + (omega_max - omega_min) * static_cast<double>(i) /
                                         static_cast<double>(steps - 1);
        const auto d = eigendecompose(build_generator(config_template.with_coupling(o)));
        auto& p = pts[i];
        p.coupling = o;
        p.w1 = d.eigenfrequencies[0];
        p.w2 = d.eigenfrequencies[1];
        p.v1 = d.eigenvectors[0];
        p.v2 = d.eigenvectors[1];
        p.delta = d.delta;
    });
    for (std::size_t i = 1; i < steps; ++i) {
        const auto& prev = pts[i - 1];
        auto& cur = pts[i];
        const double keep =
            std::abs(cur.w1.value() - prev.w1.value()) + std::abs(cur.w2.value() - prev.w2.value());
        const double swap =
            std::abs(cur.w2.value() - prev.w1.value()) + std::abs(cur.w1.value() - prev.w2.value());
        if (swap < keep) {
            std::swap(cur.w1, cur.w2);
            std::swap(cur.v1, cur.v2);
        }
    }
    return pts;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryPoint>& points) {
    CsvWriter csv(path, {"omega_coupling", "re_w1", "im_w1", "re_w2", "im_w2"});
    for (const auto& p : points) csv.row({p.coupling, p.w1.re, p.w1.im, p.w2.re, p.w2.im});
}

} // namespace easc::spectral
