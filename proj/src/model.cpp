#include "easc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "easc/error.hpp"

namespace easc::model {

namespace {

struct HermiteSegment {
    std::size_t k;
    double t;
    double h;
};

HermiteSegment locate(const TabulatedSpectrum& tab, double omega) {
    const auto& x = tab.frequencies;
    if (!(omega >= x.front() && omega <= x.back())) {
        std::ostringstream os;
        os << "frequency " << omega << " outside tabulated band [" << x.front() << ", "
           << x.back() << "]";
        throw Error(ErrorCode::OutOfBand, os.str());
    }
    auto it = std::upper_bound(x.begin(), x.end(), omega);
    std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    k = std::min(k, x.size() - 2);
    const double h = x[k + 1] - x[k];
    return {k, (omega - x[k]) / h, h};
}

double hermite_value(const TabulatedSpectrum& tab, double omega) {
    const auto [k, t, h] = locate(tab, omega);
    // Exact at nodes; avoids rounding in the cubic basis.
    if (t == 0.0) return tab.densities[k];
    if (t == 1.0) return tab.densities[k + 1];
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * tab.densities[k] + h10 * h * tab.slopes[k] + h01 * tab.densities[k + 1] +
           h11 * h * tab.slopes[k + 1];
}

double hermite_derivative(const TabulatedSpectrum& tab, double omega) {
    const auto [k, t, h] = locate(tab, omega);
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t;
    const double d11 = 3 * t2 - 2 * t;
    return (d00 * tab.densities[k] + d01 * tab.densities[k + 1]) / h + d10 * tab.slopes[k] +
           d11 * tab.slopes[k + 1];
}

// Fritsch–Carlson / PCHIP node slopes: zero at local extrema, weighted harmonic
// mean elsewhere, one-sided shape-preserving formula at the ends.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = x[k + 1] - x[k];
        delta[k] = (y[k + 1] - y[k]) / h[k];
    }
    std::vector<double> d(n, 0.0);
    if (n == 2) {
        d[0] = d[1] = delta[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) continue;
        const double w1 = 2 * h[k] + h[k - 1];
        const double w2 = h[k] + 2 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3 * d0)) return 3 * d0;
        return s;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
}

} // namespace

ReservoirSpectrum ReservoirSpectrum::flat() { return ReservoirSpectrum(FlatSpectrum{}); }

ReservoirSpectrum ReservoirSpectrum::power_law(double exponent) {
    if (!std::isfinite(exponent)) {
        throw Error(ErrorCode::Validation, "power-law exponent must be finite");
    }
    return ReservoirSpectrum(PowerLawSpectrum{exponent});
}

ReservoirSpectrum ReservoirSpectrum::tabulated(
    const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::Validation, "tabulated spectrum needs at least two samples");
    }
    TabulatedSpectrum tab;
    tab.frequencies.reserve(samples.size());
    tab.densities.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [w, r] = samples[i];
        if (!std::isfinite(w) || !std::isfinite(r) || !(w > 0.0)) {
            throw Error(ErrorCode::Validation, "tabulated samples must be finite with omega > 0");
        }
        if (i > 0 && !(w > samples[i - 1].first)) {
            throw Error(ErrorCode::Validation,
                        "tabulated frequencies must be strictly increasing");
        }
        if (r < 0.0) {
            std::ostringstream os;
            os << "negative density " << r << " at omega " << w;
            throw Error(ErrorCode::NegativeDensity, os.str());
        }
        tab.frequencies.push_back(w);
        tab.densities.push_back(r);
    }
    tab.slopes = pchip_slopes(tab.frequencies, tab.densities);
    if (!(1.0 >= tab.frequencies.front() && 1.0 <= tab.frequencies.back())) {
        throw Error(ErrorCode::OutOfBand, "tabulated spectrum must cover omega0 (omega = 1)");
    }
    const double at_ref = hermite_value(tab, 1.0);
    if (!(at_ref > 0.0)) {
        throw Error(ErrorCode::Validation, "tabulated density must be positive at omega0");
    }
    for (auto& r : tab.densities) r /= at_ref;
    for (auto& s : tab.slopes) s /= at_ref;
    return ReservoirSpectrum(std::move(tab));
}

double ReservoirSpectrum::density(double omega) const {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw Error(ErrorCode::OutOfBand, "relative density queried at non-positive frequency");
    }
    return std::visit(
        [omega](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FlatSpectrum>) {
                return 1.0;
            } else if constexpr (std::is_same_v<T, PowerLawSpectrum>) {
                return std::pow(omega, s.exponent);
            } else {
                // Exactly 1 at the reference point regardless of rounding.
                if (omega == 1.0) return 1.0;
                const double r = hermite_value(s, omega);
                if (r < 0.0) {
                    throw Error(ErrorCode::NegativeDensity, "interpolated density is negative");
                }
                return r;
            }
        },
        v_);
}

double ReservoirSpectrum::derivative(double omega) const {
    return std::visit(
        [omega](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FlatSpectrum>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, PowerLawSpectrum>) {
                return s.exponent == 0.0 ? 0.0 : s.exponent * std::pow(omega, s.exponent - 1.0);
            } else {
                return hermite_derivative(s, omega);
            }
        },
        v_);
}

std::pair<double, double> ReservoirSpectrum::band() const {
    if (const auto* tab = std::get_if<TabulatedSpectrum>(&v_)) {
        return {tab->frequencies.front(), tab->frequencies.back()};
    }
    return {0.0, std::numeric_limits<double>::infinity()};
}

bool ReservoirSpectrum::covers(double lo, double hi) const {
    const auto [a, b] = band();
    if (std::holds_alternative<TabulatedSpectrum>(v_)) return lo >= a && hi <= b;
    return lo > 0.0;
}

bool ReservoirSpectrum::is_flat() const {
    return std::visit(
        [](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FlatSpectrum>) {
                return true;
            } else if constexpr (std::is_same_v<T, PowerLawSpectrum>) {
                return s.exponent == 0.0;
            } else {
                return std::all_of(s.densities.begin(), s.densities.end(),
                                   [&](double r) { return r == s.densities.front(); });
            }
        },
        v_);
}

std::optional<double> ReservoirSpectrum::power_law_exponent() const {
    if (std::holds_alternative<FlatSpectrum>(v_)) return 0.0;
    if (const auto* p = std::get_if<PowerLawSpectrum>(&v_)) return p->exponent;
    return std::nullopt;
}

std::string ReservoirSpectrum::describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FlatSpectrum>) {
                os << "flat";
            } else if constexpr (std::is_same_v<T, PowerLawSpectrum>) {
                os << "power_law(" << s.exponent << ")";
            } else {
                os << "tabulated(" << s.frequencies.size() << " samples)";
            }
        },
        v_);
    return os.str();
}

ReservoirSpectrum load_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open spectrum file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Validation, "empty spectrum file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Tolerate a UTF-8 byte-order mark.
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
               line.end());
    if (line != "omega,rho") {
        throw Error(ErrorCode::Validation, "spectrum CSV header must be 'omega,rho'");
    }
    std::vector<std::pair<double, double>> samples;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::Validation,
                        "malformed spectrum row at line " + std::to_string(lineno));
        }
        try {
            std::size_t used = 0;
            const std::string a = line.substr(0, comma);
            const std::string b = line.substr(comma + 1);
            const double w = std::stod(a, &used);
            if (a.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(a);
            const double r = std::stod(b, &used);
            if (b.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(b);
            samples.emplace_back(w, r);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::Validation,
                        "non-numeric spectrum row at line " + std::to_string(lineno));
        }
    }
    return ReservoirSpectrum::tabulated(samples);
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<std::pair<double, double>>& samples) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write spectrum file " + path.string());
    out << "omega,rho\n" << std::setprecision(17);
    for (const auto& [w, r] : samples) out << w << ',' << r << '\n';
}

double relative_density(const ReservoirSpectrum& spectrum, double omega) {
    return spectrum.density(omega);
}

double rate_at(double gamma_ref, const ReservoirSpectrum& spectrum, double omega) {
    if (!(gamma_ref >= 0.0)) throw Error(ErrorCode::Validation, "reference rate must be >= 0");
    if (gamma_ref == 0.0) {
        // Still validates the query frequency.
        (void)spectrum.density(omega);
        return 0.0;
    }
    return gamma_ref * spectrum.density(omega);
}

std::string to_string(EiMode mode) {
    switch (mode) {
        case EiMode::Off: return "off";
        case EiMode::ExactDifference: return "exact_difference";
        case EiMode::GradientApprox: return "gradient_approx";
    }
    return "?";
}

std::string to_string(DiagonalMode mode) {
    return mode == DiagonalMode::AveragedRates ? "averaged_rates" : "rate_at_omega0";
}

EiMode parse_ei_mode(const std::string& text) {
    if (text == "off") return EiMode::Off;
    if (text == "exact_difference") return EiMode::ExactDifference;
    if (text == "gradient_approx") return EiMode::GradientApprox;
    throw Error(ErrorCode::Validation, "unknown ei_mode '" + text + "'");
}

DiagonalMode parse_diagonal_mode(const std::string& text) {
    if (text == "averaged_rates") return DiagonalMode::AveragedRates;
    if (text == "rate_at_omega0") return DiagonalMode::RateAtOmega0;
    throw Error(ErrorCode::Validation, "unknown diagonal_mode '" + text + "'");
}

void SystemConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::Validation, msg); };
    if (!std::isfinite(omega0) || !(omega0 > 0.0)) fail("omega0 must be finite and > 0");
    if (!std::isfinite(coupling) || coupling < 0.0) fail("coupling must be finite and >= 0");
    if (!(coupling < omega0)) fail("coupling must be < omega0 (rotating-wave domain)");
    if (!std::isfinite(gamma1) || gamma1 < 0.0) fail("gamma1 must be finite and >= 0");
    if (!std::isfinite(gamma2) || gamma2 < 0.0) fail("gamma2 must be finite and >= 0");
    if (ei_mode == EiMode::Off) return;
    const double lo = (omega0 - coupling) / omega0;
    const double hi = (omega0 + coupling) / omega0;
    for (const auto* s : {&spectrum1, &spectrum2}) {
        if (!s->covers(lo, hi)) {
            std::ostringstream os;
            os << "spectrum " << s->describe() << " does not cover [" << lo << ", " << hi << "]";
            throw Error(ErrorCode::OutOfBand, os.str());
        }
    }
}

SystemConfig SystemConfig::with_coupling(double omega) const {
    SystemConfig c = *this;
    c.coupling = omega;
    return c;
}

SystemConfig SystemConfig::with_rates(double g1, double g2) const {
    SystemConfig c = *this;
    c.gamma1 = g1;
    c.gamma2 = g2;
    return c;
}

} // namespace easc::model
