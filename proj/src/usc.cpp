#include "easc/usc.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "easc/csv.hpp"
#include "easc/error.hpp"

namespace easc::usc {

using cd = std::complex<double>;

namespace {

constexpr cd I{0.0, 1.0};

void check(double omega0, double coupling) {
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
        throw Error(ErrorCode::Validation, "omega0 must be positive");
    }
    if (!(coupling >= 0.0) || !(coupling < 0.5 * omega0)) {
        std::ostringstream msg;
        msg << "coupling " << coupling << " outside [0, omega0/2)";
        throw Error(ErrorCode::Validation, msg.str());
    }
}

} // namespace

UscGenerator build_usc_generator(double omega0, double coupling) {
    check(omega0, coupling);
    const double w = omega0;
    const double g = coupling;
    const double d2 = 2.0 * g * g / omega0; // 2D
    Matrix4cd m;
    // clang-format off
    m << -I * (w + d2), -I * g,         -I * d2,       -I * g,
         -I * g,        -I * (w + d2),  -I * g,        -I * d2,
          I * d2,        I * g,          I * (w + d2),  I * g,
          I * g,         I * d2,         I * g,         I * (w + d2);
    // clang-format on
    return {m};
}

double particle_hole_residual(const UscGenerator& g) {
    Matrix4cd sigma = Matrix4cd::Zero();
    sigma(0, 2) = sigma(1, 3) = sigma(2, 0) = sigma(3, 1) = 1.0;
    return (g.m4 - sigma * g.m4.conjugate() * sigma).cwiseAbs().maxCoeff();
}

UscFrequencies usc_eigenfrequencies(double omega0, double coupling) {
    const auto gen = build_usc_generator(omega0, coupling);
    UscFrequencies f;
    f.rwa_s = omega0 + coupling;
    f.rwa_a = omega0 - coupling;
    const double w2 = omega0 * omega0;
    const double c2 = 4.0 * coupling * coupling;
    f.closed_s = std::sqrt(w2 + 2.0 * coupling * omega0 + c2);
    f.closed_a = std::sqrt(w2 - 2.0 * coupling * omega0 + c2);

    const double r2 = std::sqrt(0.5);
    if (coupling == 0.0) {
        // degenerate: any basis works, pick the RWA one
        f.full_s = f.full_a = omega0;
        f.vector_s << r2, r2, 0.0, 0.0;
        f.vector_a << r2, -r2, 0.0, 0.0;
        return f;
    }

    Eigen::ComplexEigenSolver<Matrix4cd> solver(gen.m4);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::NotConverged, "eigensolver failed for the 4x4 generator");
    }
    bool have_s = false;
    bool have_a = false;
    for (int k = 0; k < 4; ++k) {
        const double freq = (I * solver.eigenvalues()[k]).real(); // ⟨a⟩ ∝ e^{−iωt}
        if (freq <= 0.0) continue;
        Vector4cd v = solver.eigenvectors().col(k);
        const cd sym = v[0] + v[1];
        const cd anti = v[0] - v[1];
        const double ps = std::norm(sym) + std::norm(v[2] + v[3]);
        const double pa = std::norm(anti) + std::norm(v[2] - v[3]);
        const bool symmetric = ps > pa;
        const cd ref = symmetric ? sym : anti;
        if (std::abs(ref) > 0.0) v *= std::conj(ref) / std::abs(ref);
        v /= v.norm();
        if (symmetric) {
            f.full_s = freq;
            f.vector_s = v;
            have_s = true;
        } else {
            f.full_a = freq;
            f.vector_a = v;
            have_a = true;
        }
    }
    if (!have_s || !have_a) {
        throw Error(ErrorCode::NotConverged, "could not separate symmetric and antisymmetric modes");
    }
    return f;
}

std::vector<UscDeviation> usc_deviation_report(double omega0, const std::vector<double>& couplings) {
    std::vector<UscDeviation> out;
    out.reserve(couplings.size());
    const double r2 = std::sqrt(0.5);
    for (double g : couplings) {
        const auto f = usc_eigenfrequencies(omega0, g);
        UscDeviation d;
        d.coupling = g;
        d.rwa_s = f.rwa_s;
        d.rwa_a = f.rwa_a;
        d.full_s = f.full_s;
        d.full_a = f.full_a;
        if (g > 0.0) {
            d.shift_s = (f.full_s - f.rwa_s) / (2.0 * g);
            d.shift_a = (f.full_a - f.rwa_a) / (2.0 * g);
        }
        d.overlap_s = std::abs(r2 * (f.vector_s[0] + f.vector_s[1]));
        d.overlap_a = std::abs(r2 * (f.vector_a[0] - f.vector_a[1]));
        out.push_back(d);
    }
    return out;
}

void write_usc_csv(const std::filesystem::path& path, const std::vector<UscDeviation>& rows) {
    CsvWriter csv(path, {"omega_coupling", "w_rwa_s", "w_rwa_a", "w_full_s", "w_full_a", "overlap_s",
                         "overlap_a"});
    for (const auto& r : rows) {
        csv.row({r.coupling, r.rwa_s, r.rwa_a, r.full_s, r.full_a, r.overlap_s, r.overlap_a});
    }
}

} // namespace easc::usc
