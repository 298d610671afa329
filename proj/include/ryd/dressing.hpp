#pragma once
#include <Eigen/Dense>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ryd/dynamics.hpp"
#include "ryd/emission.hpp"
#include "ryd/level.hpp"
#include "ryd/stark.hpp"

namespace ryd::dressing {

class LabelingError : public std::runtime_error {
public:
    LabelingError(const std::string& w, RydbergLevel a, RydbergLevel b)
        : std::runtime_error(w), first(a), second(b) {}
    RydbergLevel first, second;
};

class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& w, std::string trace = {})
        : std::runtime_error(w), scan_trace(std::move(trace)) {}
    std::string scan_trace;
};

struct LadderOptions {
    int manifolds = 6;           // M: n = m+1 .. m+M per block
    int photon_halfwidth = 4;    // N: photon offsets -N .. +N
    bool exact_polynomials = true;       // fitted polys for g, e, i, i'; PT otherwise
    // zero-field parabolic dipoles throughout; the field-dependent variant
    // evaluates them in the Stark eigenbasis at each field instead
    bool field_dependent_couplings = false;
    double poly_fit_lo = 250.0;  // V/m
    double poly_fit_hi = 550.0;
    double poly_fit_tol = 0.5;   // Hz
    // test seams
    bool couple_gi_only = false;     // keep only the g <-> i coupling
    bool resonant_pairs_only = false; // drop counter-rotating pairings
};

// Dressing operating point. delta0 = nu_gi(Ea) - nu0 > 0 (red detuning of the
// drive below the g -> i transition at the working field).
struct OperatingPoint {
    double field_anchor = 400.0; // Ea, V/m
    double rabi0_hz = 0.0;       // Omega0 / 2pi on the reference transition
    double detuning0_hz = 0.0;   // delta0 / 2pi
};

struct DressedLevel {
    RydbergLevel label;
    double energy_hz;   // photon-number-reduced, relative to zero-field g
    double overlap_sq;  // weight on the bare center-block state
};

struct TransitionExpansion {
    double omega_hz = 0.0; // dressed e-g transition at Ea
    double linear = 0.0;   // Hz/(V/m)
    double quadratic = 0.0; // Hz/(V/m)^2
};

struct CompensationReport {
    OperatingPoint point;
    TransitionExpansion expansion;
    double residual_dispersion_hz = 0.0;  // max - min over +-1 V/m
    double max_deviation_hz = 0.0;        // max |omega(E) - omega(Ea)| over +-1 V/m
    double detuning_vs_bare_g_hz = 0.0;   // detuning referenced to the unshifted g
};

struct ResonanceHit {
    RydbergLevel from;  // g or e (circular)
    RydbergLevel to;
    int m_to = 0;
    double detuning_hz = 0.0;
};

struct LifetimeBudget {
    double lifetime_s = 0.0;
    double total_rate = 0.0;
    struct Channel {
        RydbergLevel to;
        int m_to;
        int photon_shift;
        double nu_hz;
        double rate;
    };
    std::vector<Channel> channels;
};

// Ladder of |level, n_pi> states at fixed m, dressed by the pi-polarized
// microwave; couplings between adjacent photon blocks scale with the z-dipole
// normalized to the reference circular -> n+1 manifold element.
class DressedSystem {
public:
    explicit DressedSystem(int m_lower = 49, LadderOptions opts = {});

    const LadderOptions& options() const { return opts_; }
    int m_lower() const { return m_low_; }

    // bare level frequency in Hz relative to the zero-field lower circular state
    double bare_level_hz(const RydbergLevel& lv, double e_vpm) const;
    // g -> i transition frequency at field E (i is the downhill n+1 partner)
    double gi_transition_hz(double e_vpm) const;
    double drive_frequency_hz(const OperatingPoint& op) const;

    // dressed, photon-reduced energies of every level of the block holding
    // `any_level`, labeled by adiabatic association
    std::vector<DressedLevel> build_and_diagonalize(int m_block, double e_vpm,
                                                    double rabi_scale_hz,
                                                    const OperatingPoint& op) const;

    double dressed_energy_hz(const RydbergLevel& label, double e_vpm,
                             double rabi_hz, const OperatingPoint& op) const;

    // omega_eg-tilde(E, Omega) in Hz
    double transition_hz(double e_vpm, double rabi_hz, const OperatingPoint& op) const;

    TransitionExpansion transition_expansion(const OperatingPoint& op,
                                             double stencil_vpm = 0.25) const;

    double rabi_sensitivity(const OperatingPoint& op, double d_omega_rel) const;

    enum class Mode { two_level, multilevel };
    CompensationReport solve_compensation(Mode mode, double field_anchor,
                                          double fixed_rabi0_hz = 0.0) const;

    LifetimeBudget dressed_lifetime(const RydbergLevel& circular_level,
                                    const OperatingPoint& op,
                                    const emission::CavitySpec& cavity) const;

    std::vector<ResonanceHit> sigma_resonance_scan(const OperatingPoint& op,
                                                   double window_hz) const;

    const RydbergLevel& level_g() const { return g_; }
    const RydbergLevel& level_e() const { return e_; }
    const RydbergLevel& level_i() const { return i_; }
    const RydbergLevel& level_i_prime() const { return ip_; }
    double reference_dipole_au() const { return z_ref_; }

    // |<g(E)| z |to(E)>| between the Stark eigenstates at field E (a.u.)
    double coupling_dipole_au(const RydbergLevel& to, double e_vpm) const;

private:
    struct Block;
    const Block& block(int m) const;
    Eigen::MatrixXd ladder_hamiltonian(const Block& blk, double e_vpm,
                                       double rabi_scale_hz, double nu0_hz) const;
    void fill_dispersion(Mode mode, CompensationReport& rep) const;

    int m_low_;
    LadderOptions opts_;
    RydbergLevel g_, e_, i_, ip_;
    double z_ref_ = 0.0; // |<g|z|i'>| at the anchor field (a.u.)
    mutable std::map<int, std::shared_ptr<Block>> blocks_;
    double anchor_for_ref_ = 400.0;
};

// Two-level compensation model: g dressed by i only, e bare; closed 2x2 form.
struct TwoLevelModel {
    enum class CouplingDrift { none, follow_gi, follow_gi_prime };
    bool exact_polynomials = true;
    CouplingDrift drift = CouplingDrift::none; // fixed coupling strength

    double omega_tilde_hz(const DressedSystem& sys, double e_vpm,
                          const OperatingPoint& op) const;
};

// Bivariate quartic fit of a dressed energy (or of the e-g transition
// residual) around the operating point, used as the trajectory-facing surface.
class DressedSurface : public dynamics::EnergySurface {
public:
    // what = "g", "e" or "difference" (omega_tilde minus its anchor value)
    DressedSurface() = default;
    static DressedSurface fit(const DressedSystem& sys, const OperatingPoint& op,
                              const std::string& what, double e_half_width = 2.5,
                              double rabi_lo_rel = 0.995, double rabi_hi_rel = 1.0002,
                              int n_e = 9, int n_w = 7, double tol_hz = 1.0);

    double value_hz(double e_vpm, double rabi_hz) const;
    double d_de(double e_vpm, double rabi_hz) const;
    double d_drabi(double e_vpm, double rabi_hz) const;

    // dynamics::EnergySurface
    double energy_j(double e_vpm, double rabi_hz) const override;
    double denergy_dfield(double e_vpm, double rabi_hz) const override;
    double denergy_drabi(double e_vpm, double rabi_hz) const override;
    bool uses_rabi() const override { return true; }
    bool in_range(double e_vpm, double rabi_hz) const override;

    double residual_hz() const { return residual_; }
    const std::string& kind() const { return kind_; }
    const OperatingPoint& anchor() const { return op_; }

    void export_csv(const std::string& path, int n_e = 21, int n_w = 5) const;

private:
    std::string kind_;
    OperatingPoint op_;
    Eigen::MatrixXd coef_;  // coef(i,j): (E-Ea)^i * ((Omega-Omega0)/Omega0)^j
    double e_lo_ = 0, e_hi_ = 0, w_lo_ = 0, w_hi_ = 0;
    double residual_ = 0.0;
};

} // namespace ryd::dressing
