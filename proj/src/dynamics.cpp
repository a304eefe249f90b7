#include "easc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "easc/csv.hpp"
#include "easc/error.hpp"
#include "easc/spectral.hpp"

namespace easc::dynamics {

using model::Oscillator;

namespace {

constexpr cd I{0.0, 1.0};

using Op = Eigen::Matrix3cd;

void check_step(const IntegrationOptions& opt, double omega0, double t_end) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw Error(ErrorCode::Validation, "t_end must be finite and > 0");
    }
    if (!(opt.dt > 0.0)) throw Error(ErrorCode::Validation, "dt must be > 0");
    if (opt.dt * omega0 > kMaxStep) {
        std::ostringstream os;
        os << "dt = " << opt.dt << " exceeds " << kMaxStep << "/omega0; the carrier is not resolved";
        throw Error(ErrorCode::StepTooLarge, os.str());
    }
    if (opt.store_every == 0) throw Error(ErrorCode::Validation, "store_every must be >= 1");
}

// Fixed step count with h ≤ dt that lands exactly on t_end.
std::pair<std::size_t, double> step_plan(double t_end, double dt) {
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    const std::size_t steps = std::max<std::size_t>(n, 1);
    return {steps, t_end / static_cast<double>(steps)};
}

// 2XρY† − ρY†X − Y†Xρ
Op cross_dissipator(const Op& x, const Op& y, const Op& rho) {
    const Op yx = y.adjoint() * x;
    return 2.0 * x * rho * y.adjoint() - rho * yx - yx * rho;
}

Op commutator(const Op& a, const Op& b) { return a * b - b * a; }

struct Channel {
    double gamma_s; // rate at the symmetric-mode frequency ω₀ + Ω
    double gamma_a; // rate at the antisymmetric-mode frequency ω₀ − Ω
    double sign;    // +1 for reservoir 1, −1 for reservoir 2 (c → −c)
};

Op reservoir_term(const Channel& ch, const Op& b, const Op& c_in, const Op& rho) {
    const Op c = ch.sign * c_in;
    const double gs = ch.gamma_s;
    const double ga = ch.gamma_a;
    Op out = (gs / 2.0) * cross_dissipator(b, b, rho) + (ga / 2.0) * cross_dissipator(c, c, rho);
    // Partial-secular cross terms between the two eigenmodes.
    out += ((gs + ga) / 4.0) * (cross_dissipator(b, c, rho) + cross_dissipator(c, b, rho));
    out += ((ga - gs) / 4.0) * commutator(c.adjoint() * b, rho);
    out += ((gs - ga) / 4.0) * commutator(b.adjoint() * c, rho);
    return out;
}

Eigen::Matrix<cd, 9, 1> vec(const Op& m) { return Eigen::Map<const Eigen::Matrix<cd, 9, 1>>(m.data()); }

Op unvec(const Eigen::Matrix<cd, 9, 1>& v) {
    Op m;
    Eigen::Map<Eigen::Matrix<cd, 9, 1>>(m.data()) = v;
    return m;
}

Superoperator build_matrix(const SystemConfig& config, bool rotating) {
    const Op a1 = lowering_operator(Oscillator::First);
    const Op a2 = lowering_operator(Oscillator::Second);
    const double r2 = std::sqrt(2.0);
    const Op b = (a1 + a2) / r2;
    const Op c = (a1 - a2) / r2;
    const Op n1 = a1.adjoint() * a1;
    const Op n2 = a2.adjoint() * a2;
    const double w0 = rotating ? 0.0 : config.omega0;
    const Op h = w0 * (n1 + n2) + config.coupling * (a1.adjoint() * a2 + a2.adjoint() * a1);

    Channel ch1, ch2;
    {
        const double g = spectral::diagonal_rate(config, Oscillator::First);
        const double k = spectral::ei_coupling(config, Oscillator::First);
        ch1 = {g + k, g - k, 1.0};
    }
    {
        const double g = spectral::diagonal_rate(config, Oscillator::Second);
        const double k = spectral::ei_coupling(config, Oscillator::Second);
        ch2 = {g + k, g - k, -1.0};
    }

    Superoperator l;
    for (int col = 0; col < 9; ++col) {
        Op e = Op::Zero();
        e(col % 3, col / 3) = 1.0;
        const Op out = -I * commutator(h, e) + reservoir_term(ch1, b, c, e) + reservoir_term(ch2, b, c, e);
        l.col(col) = vec(out);
    }
    return l;
}

Eigen::Matrix2cd amplitude_matrix(const SystemConfig& config, bool rotating) {
    Eigen::Matrix2cd m = spectral::build_generator(config).m;
    if (rotating) m += I * config.omega0 * Eigen::Matrix2cd::Identity();
    return m;
}

DensityMatrix3 to_lab(const DensityMatrix3& rho, double omega0, double t) {
    DensityMatrix3 out = rho;
    const cd phase = std::exp(-I * omega0 * t);
    for (int i = 0; i < 2; ++i) {
        out(i, 2) *= phase;
        out(2, i) *= std::conj(phase);
    }
    return out;
}

double min_eigenvalue(const DensityMatrix3& rho) {
    const DensityMatrix3 h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<DensityMatrix3> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

} // namespace

Eigen::Matrix3cd lowering_operator(Oscillator which) {
    Eigen::Matrix3cd a = Eigen::Matrix3cd::Zero();
    a(2, which == Oscillator::First ? 0 : 1) = 1.0;
    return a;
}

std::vector<AmplitudeState> evolve_amplitudes(const SystemConfig& config,
                                              const AmplitudeState& initial, double t_end,
                                              const IntegrationOptions& opt) {
    config.validate();
    check_step(opt, config.omega0, t_end);
    const Eigen::Matrix2cd m = amplitude_matrix(config, opt.rotating_frame);
    const auto [steps, h] = step_plan(t_end, opt.dt);

    Eigen::Vector2cd a(initial.a1, initial.a2);
    if (opt.rotating_frame) a *= std::exp(I * config.omega0 * initial.t);
    std::vector<AmplitudeState> out;
    out.reserve(steps / opt.store_every + 2);
    auto store = [&](std::size_t k) {
        const double t = initial.t + h * static_cast<double>(k);
        Eigen::Vector2cd lab = a;
        if (opt.rotating_frame) lab *= std::exp(-I * config.omega0 * t);
        out.push_back({lab[0], lab[1], t});
    };
    store(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const Eigen::Vector2cd k1 = m * a;
        const Eigen::Vector2cd k2 = m * (a + 0.5 * h * k1);
        const Eigen::Vector2cd k3 = m * (a + 0.5 * h * k2);
        const Eigen::Vector2cd k4 = m * (a + h * k3);
        a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (k % opt.store_every == 0 || k == steps) store(k);
    }
    return out;
}

AmplitudeState propagate_exact(const SystemConfig& config, const AmplitudeState& initial, double t) {
    const Eigen::Matrix2cd m = spectral::build_generator(config).m;
    const Eigen::Matrix2cd u = (m * t).exp();
    const Eigen::Vector2cd a = u * Eigen::Vector2cd(initial.a1, initial.a2);
    return {a[0], a[1], initial.t + t};
}

DensityMatrix3 Liouvillian::apply(const DensityMatrix3& rho) const { return unvec(matrix * vec(rho)); }

Liouvillian build_liouvillian(const SystemConfig& config) {
    config.validate();
    return {build_matrix(config, false)};
}

Eigen::Matrix2cd induced_amplitude_generator(const Liouvillian& l) {
    // ⟨aᵢ⟩ = Tr(aᵢρ) = ρ(i, 2); the coherence |eⱼ⟩⟨0,0| is column 2 of vec index j + 3·2.
    Eigen::Matrix2cd m;
    for (int j = 0; j < 2; ++j) {
        DensityMatrix3 e = DensityMatrix3::Zero();
        e(j, 2) = 1.0;
        const DensityMatrix3 out = l.apply(e);
        for (int i = 0; i < 2; ++i) m(i, j) = out(i, 2);
    }
    return m;
}

Observables observables(const DensityMatrix3& rho, double t) {
    return {t, rho(0, 0).real(), rho(1, 1).real(), 2.0 * rho(0, 1).real(), rho(0, 1).real()};
}

Observables observables(const AmplitudeState& a) {
    const cd c = std::conj(a.a1) * a.a2;
    return {a.t, std::norm(a.a1), std::norm(a.a2), 2.0 * c.real(), c.real()};
}

DensityMatrix3 excited_first() {
    DensityMatrix3 rho = DensityMatrix3::Zero();
    rho(0, 0) = 1.0;
    return rho;
}

void check_density_matrix(const DensityMatrix3& rho) {
    if (!rho.allFinite()) throw Error(ErrorCode::Validation, "density matrix has non-finite entries");
    if ((rho - rho.adjoint()).norm() > 1e-10) {
        throw Error(ErrorCode::Validation, "density matrix is not Hermitian");
    }
    if (std::abs(rho.trace() - 1.0) > 1e-9) {
        throw Error(ErrorCode::Validation, "density matrix trace differs from 1");
    }
    if (min_eigenvalue(rho) < -1e-9) {
        throw Error(ErrorCode::Validation, "density matrix has a negative eigenvalue");
    }
}

DensityEvolution evolve_density_matrix(const SystemConfig& config, const DensityMatrix3& rho0,
                                       double t_end, const IntegrationOptions& opt) {
    config.validate();
    check_step(opt, config.omega0, t_end);
    check_density_matrix(rho0);
    const Superoperator l = build_matrix(config, opt.rotating_frame);
    const auto [steps, h] = step_plan(t_end, opt.dt);

    DensityEvolution out;
    out.min_eigenvalue = min_eigenvalue(rho0);
    Eigen::Matrix<cd, 9, 1> v = vec(rho0);
    auto store = [&](std::size_t k) {
        const double t = h * static_cast<double>(k);
        DensityMatrix3 rho = unvec(v);
        if (opt.rotating_frame) rho = to_lab(rho, config.omega0, t);
        const double drift = std::abs(rho.trace() - 1.0);
        out.max_trace_drift = std::max(out.max_trace_drift, drift);
        if (drift > 1e-7) {
            std::ostringstream os;
            os << "trace drifted by " << drift << " at t = " << t << "; reduce dt";
            throw Error(ErrorCode::InvariantViolation, os.str());
        }
        const double ev = min_eigenvalue(rho);
        out.min_eigenvalue = std::min(out.min_eigenvalue, ev);
        if (ev < -1e-9) ++out.positivity_violations;
        out.times.push_back(t);
        out.states.push_back(rho);
        out.observables.push_back(observables(rho, t));
    };
    store(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const auto k1 = (l * v).eval();
        const auto k2 = (l * (v + 0.5 * h * k1)).eval();
        const auto k3 = (l * (v + 0.5 * h * k2)).eval();
        const auto k4 = (l * (v + h * k3)).eval();
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (k % opt.store_every == 0 || k == steps) store(k);
    }
    return out;
}

ComparisonReport compare_series(const std::vector<AmplitudeState>& amp, const DensityEvolution& me) {
    ComparisonReport r;
    const std::size_t n = std::min(amp.size(), me.observables.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Observables a = observables(amp[i]);
        const Observables& m = me.observables[i];
        r.max_e_deviation = std::max({r.max_e_deviation, std::abs(a.e1 - m.e1), std::abs(a.e2 - m.e2)});
        r.max_x_deviation = std::max(r.max_x_deviation, std::abs(a.x - m.x));
        r.max_abs_x_master = std::max(r.max_abs_x_master, std::abs(m.x));
        r.max_abs_x_amplitude = std::max(r.max_abs_x_amplitude, std::abs(a.x));
        r.max_abs_re_rho_1001 = std::max(r.max_abs_re_rho_1001, std::abs(m.re_rho_1001));
    }
    return r;
}

ComparisonReport compare_amplitude_vs_master(const SystemConfig& config, double t_end,
                                             const IntegrationOptions& opt) {
    const auto amp = evolve_amplitudes(config, {1.0, 0.0, 0.0}, t_end, opt);
    const auto me = evolve_density_matrix(config, excited_first(), t_end, opt);
    return compare_series(amp, me);
}

void write_amplitudes_csv(const std::filesystem::path& path, const std::vector<AmplitudeState>& series) {
    CsvWriter csv(path, {"t", "re_a1", "im_a1", "re_a2", "im_a2"});
    for (const auto& s : series) csv.row({s.t, s.a1.real(), s.a1.imag(), s.a2.real(), s.a2.imag()});
}

void write_observables_csv(const std::filesystem::path& path, const std::vector<Observables>& series) {
    CsvWriter csv(path, {"t", "e1", "e2", "x", "re_rho_1001"});
    for (const auto& o : series) csv.row({o.t, o.e1, o.e2, o.x, o.re_rho_1001});
}

} // namespace easc::dynamics
