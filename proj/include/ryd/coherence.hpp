#pragma once
#include <complex>
#include <optional>
#include <vector>

#include "ryd/dynamics.hpp"

namespace ryd::coherence {

// Pair of state-dependent potential-energy surfaces for the two dressed
// (or bare) internal states. Phases integrate the surface difference.
struct StatePair {
    std::shared_ptr<const dynamics::EnergySurface> g;
    std::shared_ptr<const dynamics::EnergySurface> e;
    double rabi0_hz = 0.0;            // reference Rabi at trap centre
    double field_anchor_vpm = 400.0;  // the pulses are resonant here
};

struct RamseyConfig {
    field::HarmonicPotential hp;
    field::DriveSettings drive;
    dynamics::ModeProfile mode_profile; // dressing amplitude f(r)
    dynamics::InitialEnsemble ensemble;
    double t_max = 0.5;                // s
    std::optional<double> t_pi;        // echo pulse time
    double theta_err_sigma = 0.1;      // rad, pi-pulse angle error
    int n_out = 201;                   // contrast output samples
    double rel_tol = 1e-8;
    int records_per_period = 20;

    // shared: one orbit per atom, both surfaces evaluated along it (the
    // Stern-Gerlach separation is small enough to permit this); per_state:
    // each internal state follows its own surface.
    enum class Motion { shared_trajectory, per_state } motion = Motion::shared_trajectory;

    bool keep_phases = false;

    void validate() const;
};

struct RamseyResult {
    std::vector<double> t;
    std::vector<double> contrast;     // echo applied at t_pi when configured
    std::vector<int> n_valid;         // trajectories contributing per sample
    std::vector<double> final_phases; // phi(t_max) of fully valid trajectories
    // per-trajectory phi on the output grid (NaN past the validity horizon),
    // kept when RamseyConfig::keep_phases is set
    std::vector<std::vector<double>> phase_series;
    double mean_separation_m = 0.0;   // Stern-Gerlach diagnostics
    double max_separation_m = 0.0;
    double lambda_db_m = 0.0;
};

RamseyResult run_ramsey(const RamseyConfig& cfg, const StatePair& states);

// Phase of one trajectory pair by trapezoidal quadrature of the energy
// difference minus the anchor transition. Both series must share the grid.
double ramsey_phase(const std::vector<double>& t,
                    const std::vector<double>& nu_g_hz,
                    const std::vector<double>& nu_e_hz, double reference_hz);

// C = sqrt(mean(cos)^2 + mean(sin)^2)
double contrast_of(const std::vector<double>& phases);

struct HistogramBin {
    double center;
    int count;
    bool small_phase; // |phi| < pi class
};
std::vector<HistogramBin> phase_histogram(const std::vector<double>& phases, int bins);

struct SternGerlachReport {
    double mean_separation_m = 0.0;
    double max_separation_m = 0.0;
    double lambda_db_m = 0.0;
    bool ok = false; // max separation below lambda_dB / 10
};
SternGerlachReport stern_gerlach_check(const RamseyConfig& cfg, const StatePair& states,
                                       int n_pairs = 10);

} // namespace ryd::coherence
