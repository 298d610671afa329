#pragma once
#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ryd/field.hpp"
#include "ryd/rng.hpp"

namespace ryd::dynamics {

// Potential energy of the atom as a function of the local field modulus and,
// for dressed states, the local Rabi frequency.
class EnergySurface {
public:
    virtual ~EnergySurface() = default;
    virtual double energy_j(double field_vpm, double rabi_hz) const = 0;
    virtual double denergy_dfield(double field_vpm, double rabi_hz) const = 0;
    virtual double denergy_drabi(double, double) const { return 0.0; }
    virtual bool uses_rabi() const { return false; }
    // false when the surface was evaluated outside its fitted window
    virtual bool in_range(double, double) const { return true; }
};

// Bare quadratic Stark energy, E = alpha E^2 with alpha in J/(V/m)^2.
class QuadraticSurface : public EnergySurface {
public:
    explicit QuadraticSurface(double alpha_j) : alpha_(alpha_j) {}
    double energy_j(double e, double) const override { return alpha_ * e * e; }
    double denergy_dfield(double e, double) const override { return 2.0 * alpha_ * e; }
    double alpha_j() const { return alpha_; }

private:
    double alpha_;
};

// Energy polynomial in the field modulus (coefficients in Hz/(V/m)^k).
class PolynomialSurface : public EnergySurface {
public:
    PolynomialSurface(Eigen::VectorXd coeffs_hz, double e_min, double e_max);
    double energy_j(double e, double) const override;
    double denergy_dfield(double e, double) const override;
    bool in_range(double e, double) const override { return e >= e_min_ && e <= e_max_; }

private:
    Eigen::VectorXd c_, dc_;
    double e_min_, e_max_;
};

struct AtomSpec {
    double mass_kg;
    std::shared_ptr<const EnergySurface> surface;
    bool gravity = true;
};

// Dressing-field spatial profile: amplitude vs position, 1 at the origin.
struct ModeProfile {
    // uniform: f = 1 everywhere; sinusoidal: f = cos(pi y / (2 y_node))
    enum class Kind { uniform, sinusoidal_y } kind = Kind::uniform;
    double y_node = 1e-2; // m
    double value(const Eigen::Vector3d& r) const;
    Eigen::Vector3d gradient(const Eigen::Vector3d& r) const;
};

struct RabiField {
    double omega0_hz = 0.0; // reference Rabi frequency (ordinary Hz)
    ModeProfile profile;
    // The spatial Rabi variation always enters the recorded energies; the
    // corresponding mechanical force is kept out of the published trajectory
    // model and can be switched on here.
    bool gradient_force = false;
};

// Extra scalar integrated along the trajectory with the same adaptive
// accuracy as the motion (e.g. an accumulated phase). Receives the local
// field sample and the local Rabi frequency.
using AuxIntegrand = std::function<double(double t, const Eigen::Vector3d& r,
                                          const field::FieldSample& s, double rabi_hz)>;

struct IntegrationOptions {
    double rel_tol = 1e-8;
    double abs_tol_pos = 1e-12;   // m
    int records_per_period = 20;
    std::optional<RabiField> rabi; // needed when the surface uses it
    AuxIntegrand aux;              // optional accumulated quantity
    double aux_abs_tol = 1e-9;
};

struct TrajectorySample {
    double t;
    Eigen::Vector3d r;
    Eigen::Vector3d v;
    double field_vpm;
    double tilt_rad;
    double aux = 0.0; // integral of the aux integrand up to t
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    bool trapped = true;
    std::optional<double> exit_time;
    bool surface_in_range = true;   // stayed within the energy surface window
    double max_direction_rate = 0.0; // rad/s, adiabaticity metric
    double extension_m = 0.0;        // max |r - r_mean|, classical-motion metric
};

using SampleObserver = std::function<void(const TrajectorySample&)>;

// Integrate m r'' = -grad E(|E|(r,t), Omega(r,t)) - m g u_z from (r0, v0).
// Stops early (trapped = false) when |r| leaves the validity sphere.
Trajectory integrate(const AtomSpec& atom, const field::HarmonicPotential& hp,
                     const field::DriveSettings& drive, const Eigen::Vector3d& r0,
                     const Eigen::Vector3d& v0, double t_end,
                     const IntegrationOptions& opts = {},
                     const SampleObserver& observer = nullptr,
                     bool keep_samples = true);

// Mathieu parameters of the two-term trap model (trap-A-like symmetry).
Eigen::Vector3d mathieu_q(const field::DriveSettings& drive,
                          const field::HarmonicPotential& hp, double alpha_j,
                          double mass_kg);
bool stability_classify(const Eigen::Vector3d& q);
// drive frequency at which |q_z| crosses the stability bound
double mathieu_threshold_omega(const field::DriveSettings& drive,
                               const field::HarmonicPotential& hp, double alpha_j,
                               double mass_kg, double q_crit = 0.907);

struct InitialEnsemble {
    int count = 100;
    double temperature_k = 300e-9;
    double sigma_v_ref = 5.35e-3;  // m/s at the 300 nK reference
    double sigma_r_ref = 0.27e-6;  // m at the 300 nK reference
    double recoil_v_y = 6e-3;      // m/s added along +y
    std::uint64_t seed = 1;

    std::pair<Eigen::Vector3d, Eigen::Vector3d> draw(int index) const;
};

struct EnsembleResult {
    std::vector<char> trapped;
    double efficiency = 0.0;
    double mean_theta = 0.0;     // ensemble mean of per-trajectory time averages
    double mean_theta_sq = 0.0;  // same for theta^2
};

EnsembleResult trapping_efficiency(const AtomSpec& atom,
                                   const field::HarmonicPotential& hp,
                                   const field::DriveSettings& drive,
                                   const InitialEnsemble& ensemble, double t_hold,
                                   const IntegrationOptions& opts = {});

class BracketError : public std::runtime_error {
public:
    BracketError(const std::string& w, double eff_lo, double eff_hi)
        : std::runtime_error(w), efficiency_lo(eff_lo), efficiency_hi(eff_hi) {}
    double efficiency_lo, efficiency_hi;
};

// Temperature at which half the ensemble stays trapped for 1 s (10% resolution).
double trap_depth(const AtomSpec& atom, const field::HarmonicPotential& hp,
                  const field::DriveSettings& drive, const InitialEnsemble& ensemble,
                  double t_lo = 5e-6, double t_hi = 5e-3,
                  const IntegrationOptions& opts = {});

struct MacromotionFrequencies {
    double f_rho_hz = 0.0;
    double f_z_hz = 0.0;
};
class AnalysisError : public std::runtime_error {
public:
    explicit AnalysisError(const std::string& w) : std::runtime_error(w) {}
};
// Dominant sub-drive spectral peaks of x(t) and z(t).
MacromotionFrequencies macromotion_frequencies(const Trajectory& traj,
                                               double drive_omega);

struct TiltStatistics {
    double mean_theta = 0.0;
    double mean_theta_sq = 0.0;
};
TiltStatistics tilt_statistics(const std::vector<Trajectory>& trajectories);

} // namespace ryd::dynamics
