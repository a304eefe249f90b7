#include "easc/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "easc/csv.hpp"
#include "easc/error.hpp"
#include "easc/parallel.hpp"
#include "easc/spectral.hpp"

namespace easc::regimes {

namespace {

constexpr double kInvPhi = 0.6180339887498949; // (√5 − 1)/2

double delta_at(const SystemConfig& tmpl, double omega) {
    return spectral::eigendecompose(spectral::build_generator(tmpl.with_coupling(omega))).delta;
}

struct Bracket {
    double a, b;
    double x;
    double fx;
};

// Golden-section minimization of f on [a, b]. The lower end a only moves when
// the interior probes say the minimum lies to its right, so a minimum pinned to
// an endpoint leaves that endpoint untouched.
template <class F>
Bracket golden_minimize(F&& f, double a, double b, double rel_tol, int max_iter = 200) {
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < max_iter; ++it) {
        if (b - a <= rel_tol * std::max(std::abs(a), std::abs(b))) break;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double x = fc < fd ? c : d;
    return {a, b, x, std::min(fc, fd)};
}

std::pair<double, double> tabulated_reach(const model::ReservoirSpectrum& s) {
    const auto [lo, hi] = s.band();
    return {lo, hi};
}

} // namespace

std::string to_string(Regime r) { return r == Regime::WC ? "WC" : "SC"; }

double default_search_limit(const SystemConfig& config) {
    double limit = 0.5 * config.omega0;
    if (config.ei_mode == model::EiMode::Off) return limit;
    for (const auto* s : {&config.spectrum1, &config.spectrum2}) {
        if (!std::holds_alternative<model::TabulatedSpectrum>(s->variant())) continue;
        const auto [lo, hi] = tabulated_reach(*s);
        const double reach = std::min(1.0 - lo, hi - 1.0) * config.omega0;
        // Keep 1 ± Ω/ω₀ strictly inside the table despite rounding.
        limit = std::min(limit, reach * (1.0 - 1e-9));
    }
    return limit;
}

TransitionSearch locate_transition(const SystemConfig& tmpl, double lo, double hi) {
    if (!(lo >= 0.0) || !(hi > lo) || !(hi < tmpl.omega0)) {
        throw Error(ErrorCode::Validation, "transition search band must satisfy 0 <= lo < hi < omega0");
    }
    const std::size_t n = kCoarseScanPoints;
    std::vector<double> xs(n), fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        fs[i] = delta_at(tmpl, xs[i]);
    }
    xs.back() = hi;
    const std::size_t i = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());

    TransitionSearch out;
    // Equal rates put the EP at zero coupling.
    if (i == 0 && lo == 0.0 && fs[0] <= 1e-14 * (tmpl.gamma1 + tmpl.gamma2)) {
        out.omega = 0.0;
        out.min_delta = fs[0];
        return out;
    }
    const double a = xs[i == 0 ? 0 : i - 1];
    const double b = xs[i == n - 1 ? n - 1 : i + 1];
    auto f = [&](double x) { return delta_at(tmpl, x); };
    const Bracket br = golden_minimize(f, a, b, kRefineTolerance);
    out.omega = 0.5 * (br.a + br.b);
    out.min_delta = br.fx;
    if (i == 0 && br.a == lo && fs[0] <= br.fx) {
        out.edge = BandEdge::Lower;
        out.omega = lo;
        out.min_delta = fs[0];
    } else if (i == n - 1 && br.b == hi && fs[n - 1] <= br.fx) {
        out.edge = BandEdge::Upper;
        out.omega = hi;
        out.min_delta = fs[n - 1];
    }
    return out;
}

double transition_coupling(const SystemConfig& tmpl, double lo, double hi) {
    const auto s = locate_transition(tmpl, lo, hi);
    if (s.edge != BandEdge::None) {
        throw Error(ErrorCode::NoInteriorMinimum,
                    std::string("eigenfrequency distance is minimal at the ") +
                        (s.edge == BandEdge::Lower ? "lower" : "upper") +
                        " edge of the coupling band");
    }
    return s.omega;
}

double transition_coupling(const SystemConfig& tmpl) {
    return transition_coupling(tmpl, 0.0, default_search_limit(tmpl));
}

PhaseDiagram phase_diagram(const SystemConfig& tmpl, const std::vector<double>& gamma1_grid,
                           double ratio, const std::vector<double>& omega_grid, unsigned threads) {
    auto ascending = [](const std::vector<double>& v) {
        return !v.empty() && std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
    };
    if (!ascending(gamma1_grid) || !ascending(omega_grid)) {
        throw Error(ErrorCode::Validation, "phase-diagram grids must be non-empty and ascending");
    }
    if (!(ratio >= 0.0) || gamma1_grid.front() < 0.0 || omega_grid.front() < 0.0) {
        throw Error(ErrorCode::Validation, "phase-diagram rates, ratio and couplings must be >= 0");
    }
    PhaseDiagram pd;
    pd.gamma1_grid = gamma1_grid;
    pd.omega_grid = omega_grid;
    pd.ratio = ratio;
    pd.rows.resize(gamma1_grid.size());
    const double hi = omega_grid.back();

    parallel_for(gamma1_grid.size(), threads, [&](std::size_t r) {
        const double g1 = gamma1_grid[r];
        const SystemConfig row_cfg = tmpl.with_rates(g1, ratio * g1);
        PhaseRow& row = pd.rows[r];
        row.gamma1 = g1;
        row.search = locate_transition(row_cfg, 0.0, hi);
        row.no_interior_minimum = row.search.edge != BandEdge::None;
        row.cells.resize(omega_grid.size());
        for (std::size_t c = 0; c < omega_grid.size(); ++c) {
            const double o = omega_grid[c];
            const auto gen = spectral::build_generator(row_cfg.with_coupling(o));
            const auto d = spectral::eigendecompose(gen);
            PhaseCell& cell = row.cells[c];
            cell.delta = d.delta;
            cell.interaction_energy_1 = d.interaction_energies[0];
            cell.interaction_energy_2 = d.interaction_energies[1];
            switch (row.search.edge) {
                case BandEdge::Lower: cell.regime = Regime::SC; break;
                case BandEdge::Upper: cell.regime = Regime::WC; break;
                case BandEdge::None:
                    cell.regime = o <= row.search.omega ? Regime::WC : Regime::SC;
                    break;
            }
        }
    });

    double sup = -1.0;
    std::vector<double> running(gamma1_grid.size(), -1.0);
    for (std::size_t r = 0; r < pd.rows.size(); ++r) {
        const auto& row = pd.rows[r];
        if (!row.no_interior_minimum) {
            pd.boundary.emplace_back(row.gamma1, row.search.omega);
            sup = std::max(sup, row.search.omega);
        }
        running[r] = sup;
    }
    if (sup > 0.0) {
        pd.omega_cp = sup;
        const double cut = gamma1_grid.back() / 10.0;
        double before = -1.0;
        for (std::size_t r = 0; r < gamma1_grid.size() && gamma1_grid[r] <= cut; ++r) before = running[r];
        pd.saturation_change =
            before > 0.0 ? (sup - before) / sup : std::numeric_limits<double>::infinity();
        pd.converged = pd.saturation_change < 0.01;
    } else {
        pd.saturation_change = std::numeric_limits<double>::infinity();
    }
    return pd;
}

void write_phase_diagram_csv(const std::filesystem::path& path, const PhaseDiagram& pd) {
    CsvWriter csv(path, {"gamma1", "omega", "regime", "delta", "e_int_1", "e_int_2"});
    for (const auto& row : pd.rows) {
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            const auto& cell = row.cells[c];
            csv.field(row.gamma1).field(pd.omega_grid[c]).field(to_string(cell.regime));
            csv.field(cell.delta).field(cell.interaction_energy_1).field(cell.interaction_energy_2);
            csv.end_row();
        }
    }
}

void write_energy_map_csv(const std::filesystem::path& path, const PhaseDiagram& pd) {
    CsvWriter csv(path, {"gamma1", "omega", "regime", "e_int_1", "e_int_2"});
    for (const auto& row : pd.rows) {
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            const auto& cell = row.cells[c];
            csv.field(row.gamma1).field(pd.omega_grid[c]).field(to_string(cell.regime));
            csv.field(cell.interaction_energy_1).field(cell.interaction_energy_2);
            csv.end_row();
        }
    }
}

void write_phase_diagram_summary(const std::filesystem::path& path, const PhaseDiagram& pd) {
    nlohmann::json j;
    j["boundary"] = nlohmann::json::array();
    for (const auto& [g, o] : pd.boundary) j["boundary"].push_back({g, o});
    j["omega_cp"] = pd.omega_cp ? nlohmann::json(*pd.omega_cp) : nlohmann::json(nullptr);
    j["converged"] = pd.converged;
    j["saturation_change"] =
        std::isfinite(pd.saturation_change) ? nlohmann::json(pd.saturation_change) : nlohmann::json(nullptr);
    j["no_interior_minimum_rows"] = nlohmann::json::array();
    for (const auto& row : pd.rows) {
        if (!row.no_interior_minimum) continue;
        j["no_interior_minimum_rows"].push_back(
            {{"gamma1", row.gamma1}, {"edge", row.search.edge == BandEdge::Lower ? "lower" : "upper"}});
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

CriticalCoupling critical_coupling(const SystemConfig& tmpl, double ratio, double gamma1_max,
                                   double tol, const CriticalOptions& opt) {
    if (!(ratio > 0.0) || !(gamma1_max > 0.0) || !(tol > 0.0) || !(opt.gamma1_min > 0.0) ||
        !(opt.ladder_ratio > 1.0) || !(gamma1_max > opt.gamma1_min)) {
        throw Error(ErrorCode::Validation,
                    "critical coupling needs ratio, tol > 0, ladder ratio > 1 and gamma1_max > gamma1_min");
    }
    const bool no_gradient =
        tmpl.ei_mode == model::EiMode::Off ||
        ((tmpl.spectrum1.is_flat() || tmpl.spectrum1.derivative(1.0) == 0.0) &&
         (tmpl.spectrum2.is_flat() || tmpl.spectrum2.derivative(1.0) == 0.0));
    if (no_gradient) {
        throw Error(ErrorCode::Unbounded,
                    "no density-of-states gradient at omega0: strong coupling is lost at large rates for every coupling");
    }
    const double limit = opt.search_limit.value_or(default_search_limit(tmpl));

    std::vector<double> ladder;
    for (double g = opt.gamma1_min; g <= gamma1_max * (1.0 + 1e-12); g *= opt.ladder_ratio) {
        ladder.push_back(g);
    }
    std::vector<TransitionSearch> found(ladder.size());
    parallel_for(ladder.size(), opt.threads, [&](std::size_t k) {
        found[k] = locate_transition(tmpl.with_rates(ladder[k], ratio * ladder[k]), 0.0, limit);
    });

    CriticalCoupling out;
    std::vector<double> running;
    std::size_t best = ladder.size();
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (found[k].edge == BandEdge::Upper) {
            throw Error(ErrorCode::NoInteriorMinimum,
                        "transition reaches the upper edge of the coupling band at gamma1 = " +
                            std::to_string(ladder[k]));
        }
        if (found[k].edge == BandEdge::Lower) continue;
        out.ladder.emplace_back(ladder[k], found[k].omega);
        if (best == ladder.size() || found[k].omega > found[best].omega) best = k;
        running.push_back(found[best].omega);
    }
    if (best == ladder.size()) {
        throw Error(ErrorCode::NotConverged, "no rung of the rate ladder has an interior transition");
    }
    out.converged = running.size() >= 2 &&
                    std::abs(running.back() - running[running.size() - 2]) < tol * running.back();

    // Polish the supremum between the neighbouring rungs.
    const double ga = ladder[best == 0 ? 0 : best - 1];
    const double gb = ladder[std::min(best + 1, ladder.size() - 1)];
    auto negative_boundary = [&](double log_g) {
        const double g = std::exp(log_g);
        const auto s = locate_transition(tmpl.with_rates(g, ratio * g), 0.0, limit);
        return s.edge == BandEdge::None ? -s.omega : 0.0;
    };
    out.omega_cp = found[best].omega;
    out.gamma1_at_cp = ladder[best];
    if (gb > ga) {
        const Bracket br = golden_minimize(negative_boundary, std::log(ga), std::log(gb), 1e-10, 80);
        if (-br.fx > out.omega_cp) {
            out.omega_cp = -br.fx;
            out.gamma1_at_cp = std::exp(br.x);
        }
    }
    if (!out.converged && opt.require_convergence) {
        throw Error(ErrorCode::NotConverged,
                    "boundary supremum still rising at gamma1_max = " + std::to_string(gamma1_max));
    }
    return out;
}

std::vector<SplittingPoint> real_splitting_curve(const SystemConfig& tmpl, double omega_min,
                                                 double omega_max, std::size_t steps,
                                                 unsigned threads) {
    const auto traj = spectral::trajectory(tmpl, omega_min, omega_max, steps, threads);
    std::vector<SplittingPoint> out;
    out.reserve(traj.size());
    for (const auto& p : traj) out.push_back({p.coupling, std::abs(p.w1.re - p.w2.re)});
    return out;
}

void write_splitting_csv(const std::filesystem::path& path, const std::vector<SplittingPoint>& pts) {
    CsvWriter csv(path, {"omega_coupling", "re_splitting"});
    for (const auto& p : pts) csv.row({p.coupling, p.splitting});
}

} // namespace easc::regimes
