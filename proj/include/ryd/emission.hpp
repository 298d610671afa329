#pragma once
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ryd/level.hpp"

namespace ryd::emission {

// Plane cavity: two mirrors at z = 0 and z = spacing, atom at z_atom.
struct CavitySpec {
    double spacing = 1e-3;      // L, m
    double z_atom = 0.5e-3;     // m
    double lambda = 6e-3;       // transition wavelength, m
    double skin_depth = 0.0;    // m; 0 = perfect mirrors

    void validate() const;
    double reflection_rho() const;   // exp(-2 pi delta / lambda)
    double reflection_chi() const;   // 2 pi delta / lambda
};

enum class DipoleOrientation { parallel, perpendicular };

class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& w) : std::runtime_error(w) {}
};

// u_d . F^(r)(r_d, r_d, omega): the reflected part of the cavity
// susceptibility summed over mirror images.
std::complex<double> image_susceptibility(const CavitySpec& cavity,
                                          DipoleOrientation orientation);

// Same sum with the reflection factor rho e^{i chi} given explicitly
// (rho in [0,1]; rho = 1 triggers the extrapolated evaluation).
std::complex<double> image_susceptibility_with_reflection(const CavitySpec& cavity,
                                                          DipoleOrientation orientation,
                                                          double rho, double chi);

// Gamma / Gamma_0 = 1 + (3/2) Im[u_d . F^(r)]; tiny negative truncation
// residue is clipped to zero.
double decay_ratio(const CavitySpec& cavity, DipoleOrientation orientation);

// Independent route: mode sum between perfect mirrors (skin depth ignored).
double mode_sum_decay_ratio(const CavitySpec& cavity, DipoleOrientation orientation);

// Eq-style corrected inhibition: Gamma_par/G0 + (Gamma_perp/G0) * theta_sq_bar.
double corrected_inhibition(double gamma_par_ratio, double gamma_perp_ratio,
                            double theta_sq_bar);

// Survival probability along a trajectory with sampled tilt angles:
// P = exp(-Gamma0 * (Gamma_perp/Gamma0) * integral theta^2 dt).
double survival_probability(double gamma0, double gamma_perp_ratio,
                            const std::vector<double>& t,
                            const std::vector<double>& theta);

// Bose occupation at temperature T and (ordinary) frequency nu.
double thermal_occupation(double nu_hz, double temperature_k);

// Blackbody transfer rate out of a circular level through pi transitions to
// the same-m multiplicities above it, each exalted by the cavity's
// perpendicular-dipole factor at its own wavelength.
struct BlackbodyChannel {
    RydbergLevel to;
    double nu_hz = 0.0;
    double rate_per_s = 0.0; // n_t * A_pi * exaltation
};
struct BlackbodyResult {
    double total_rate_per_s = 0.0;
    std::vector<BlackbodyChannel> channels;
};
BlackbodyResult blackbody_rates(const RydbergLevel& level, double temperature_k,
                                const CavitySpec& cavity, double field_vpm = 400.0,
                                int n_manifolds = 4);

} // namespace ryd::emission
