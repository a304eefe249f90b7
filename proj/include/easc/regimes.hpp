// regimes.hpp: Weak/strong coupling classification, transition search, phase
// diagrams and the critical coupling Ω_CP

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "easc/model.hpp"

namespace easc::regimes {

using model::SystemConfig;

enum class Regime { WC, SC };
std::string to_string(Regime r);

enum class BandEdge { None, Lower, Upper };

struct TransitionSearch {
    double omega{0.0};     // argmin of Δ(Ω), or the edge it collapsed onto
    double min_delta{0.0};
    BandEdge edge{BandEdge::None};
};

inline constexpr std::size_t kCoarseScanPoints = 401;
inline constexpr double kRefineTolerance = 1e-12;

// Upper end of the default Ω search band: half of ω₀, clipped to what the
// spectra cover (a tabulated band may be much narrower).
double default_search_limit(const SystemConfig& config);

// Non-throwing search: coarse scan plus golden-section refinement. A minimum
// that stays on a band edge is reported through `edge`.
TransitionSearch locate_transition(const SystemConfig& config_template, double omega_lo,
                                   double omega_hi);

// Argmin of Δ(Ω) over the band; throws NoInteriorMinimum when there is none.
double transition_coupling(const SystemConfig& config_template, double omega_lo,
                           double omega_hi);
double transition_coupling(const SystemConfig& config_template);

struct PhaseCell {
    Regime regime{Regime::WC};
    double delta{0.0};
    double interaction_energy_1{0.0};
    double interaction_energy_2{0.0};
};

struct PhaseRow {
    double gamma1{0.0};
    TransitionSearch search;
    bool no_interior_minimum{false};
    std::vector<PhaseCell> cells; // one per Ω grid point
};

struct PhaseDiagram {
    std::vector<double> omega_grid;
    std::vector<double> gamma1_grid;
    double ratio{2.0};
    std::vector<PhaseRow> rows;
    std::vector<std::pair<double, double>> boundary; // (γ₁, Ω*) for interior rows
    std::optional<double> omega_cp;
    // Running supremum of the boundary changed < 1% over the last decade of γ₁.
    bool converged{false};
    double saturation_change{0.0};
};

PhaseDiagram phase_diagram(const SystemConfig& config_template, const std::vector<double>& gamma1_grid,
                           double ratio, const std::vector<double>& omega_grid,
                           unsigned threads = 1);

void write_phase_diagram_csv(const std::filesystem::path& path, const PhaseDiagram& pd);
void write_phase_diagram_summary(const std::filesystem::path& path, const PhaseDiagram& pd);
void write_energy_map_csv(const std::filesystem::path& path, const PhaseDiagram& pd);

struct CriticalOptions {
    double gamma1_min{1e-6};
    double ladder_ratio{1.5};
    std::optional<double> search_limit; // default_search_limit() when unset
    bool require_convergence{true};     // throw NotConverged instead of flagging
    unsigned threads{1};
};

struct CriticalCoupling {
    double omega_cp{0.0};
    double gamma1_at_cp{0.0};
    bool converged{false};
    std::vector<std::pair<double, double>> ladder; // (γ₁, Ω*) for interior rungs
};

// Ω_CP: supremum of the transition boundary along a geometric γ₁ ladder.
CriticalCoupling critical_coupling(const SystemConfig& config_template, double ratio,
                                   double gamma1_max, double tol,
                                   const CriticalOptions& options = {});

struct SplittingPoint {
    double coupling{0.0};
    double splitting{0.0}; // |Re ω₁ − Re ω₂| along tracked branches
};

std::vector<SplittingPoint> real_splitting_curve(const SystemConfig& config_template,
                                                 double omega_min, double omega_max,
                                                 std::size_t steps, unsigned threads = 1);

void write_splitting_csv(const std::filesystem::path& path, const std::vector<SplittingPoint>& pts);

} // namespace easc::regimes
