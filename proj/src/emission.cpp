#include "ryd/emission.hpp"

#include <cmath>

#include "ryd/constants.hpp"
#include "ryd/hydrogen.hpp"
#include "ryd/numeric.hpp"
#include "ryd/stark.hpp"

namespace ryd::emission {

void CavitySpec::validate() const {
    if (!(spacing > 0.0) || !(lambda > 0.0))
        throw DomainError("CavitySpec: spacing and wavelength must be positive");
    if (!(z_atom > 0.0 && z_atom < spacing))
        throw DomainError("CavitySpec: atom must sit strictly between the mirrors");
    if (skin_depth < 0.0 || skin_depth > 0.1 * lambda)
        throw DomainError("CavitySpec: skin depth must satisfy 0 <= delta << lambda");
}

double CavitySpec::reflection_rho() const {
    return std::exp(-two_pi * skin_depth / lambda);
}
double CavitySpec::reflection_chi() const { return two_pi * skin_depth / lambda; }

namespace {

// Field of an image dipole at axial distance h, projected on the dipole
// direction, normalized per D k^3 / (4 pi eps0). Near, intermediate and far
// field parts of the exact oscillating-dipole field.
inline std::complex<double> f_parallel(double kh) {
    const std::complex<double> ph(std::cos(kh), std::sin(kh));
    const double i1 = 1.0 / kh, i2 = i1 * i1, i3 = i2 * i1;
    return ph * std::complex<double>(i1 - i3, i2);
}
inline std::complex<double> f_perpendicular(double kh) {
    const std::complex<double> ph(std::cos(kh), std::sin(kh));
    const double i1 = 1.0 / kh, i2 = i1 * i1, i3 = i2 * i1;
    return 2.0 * ph * std::complex<double>(i3, -i2);
}

std::complex<double> image_sum(const CavitySpec& c, DipoleOrientation orient,
                               double rho, double chi) {
    const double k = two_pi / c.lambda;
    const bool par = orient == DipoleOrientation::parallel;
    const std::complex<double> refl(rho * std::cos(chi), rho * std::sin(chi));

    // reflection weights are built up incrementally: even images carry
    // refl^(2s), odd ones refl^(2s+1), with a sign flip per reflection for
    // the parallel orientation
    auto fval = [&](double h) { return par ? f_parallel(k * h) : f_perpendicular(k * h); };
    const double flip = par ? -1.0 : 1.0;

    std::complex<double> w_odd = refl * flip;          // one reflection
    std::complex<double> sum = w_odd * (fval(2.0 * c.z_atom) +
                                        fval(2.0 * (c.spacing - c.z_atom)));

    const double rho2 = rho * rho;
    const double geom = rho2 / std::max(1e-300, 1.0 - rho2);
    const double tol = 1e-13;
    std::complex<double> w_even(1.0, 0.0);
    const long max_shell = 30000000;
    long s = 1;
    for (; s <= max_shell; ++s) {
        w_even *= refl * refl; // two more reflections; parallel sign flips cancel
        w_odd *= refl * refl;
        const std::complex<double> shell =
            2.0 * w_even * fval(2.0 * s * c.spacing) +
            w_odd * (fval(2.0 * (s * c.spacing + c.z_atom)) +
                     fval(2.0 * ((s + 1) * c.spacing - c.z_atom)));
        sum += shell;
        const double mag = std::abs(shell);
        const double scale = std::max(1e-3, std::abs(sum));
        if (s > 8 && mag * std::min(geom, double(s)) < tol * scale) break;
    }
    if (s > max_shell)
        throw ConvergenceError("image_sum: series did not converge (rho too close to 1)");
    return sum;
}

std::complex<double> susceptibility_rc(const CavitySpec& cavity,
                                       DipoleOrientation orientation, double rho,
                                       double chi) {
    if (rho < 1.0 - 1e-9) return image_sum(cavity, orientation, rho, chi);
    // Perfect mirrors: the parallel series converges only conditionally.
    // Evaluate at rho = 1 - eps on a geometric eps ladder and extrapolate.
    const double eps = 1e-4;
    const auto s1 = image_sum(cavity, orientation, 1.0 - 4.0 * eps, chi);
    const auto s2 = image_sum(cavity, orientation, 1.0 - 2.0 * eps, chi);
    const auto s3 = image_sum(cavity, orientation, 1.0 - eps, chi);
    return (8.0 * s3 - 6.0 * s2 + s1) / 3.0;
}

} // namespace

std::complex<double> image_susceptibility(const CavitySpec& cavity,
                                          DipoleOrientation orientation) {
    cavity.validate();
    return susceptibility_rc(cavity, orientation, cavity.reflection_rho(),
                             cavity.reflection_chi());
}

std::complex<double> image_susceptibility_with_reflection(const CavitySpec& cavity,
                                                          DipoleOrientation orientation,
                                                          double rho, double chi) {
    if (rho < 0.0 || rho > 1.0)
        throw DomainError("image_susceptibility: rho must lie in [0,1]");
    return susceptibility_rc(cavity, orientation, rho, chi);
}

double decay_ratio(const CavitySpec& cavity, DipoleOrientation orientation) {
    const auto chi_sum = image_susceptibility(cavity, orientation);
    double ratio = 1.0 + 1.5 * chi_sum.imag();
    if (ratio < 0.0) {
        if (ratio < -1e-6)
            throw ConvergenceError("decay_ratio: negative rate " + std::to_string(ratio) +
                                   " beyond truncation tolerance");
        ratio = 0.0;
    }
    return ratio;
}

double mode_sum_decay_ratio(const CavitySpec& cavity, DipoleOrientation orientation) {
    cavity.validate();
    const double u = 2.0 * cavity.spacing / cavity.lambda;
    const int n_max = int(std::floor(u));
    const double zfrac = pi * cavity.z_atom / cavity.spacing;
    double acc = 0.0;
    if (orientation == DipoleOrientation::parallel) {
        for (int n = 1; n <= n_max; ++n) {
            const double x = n / u;
            const double sn = std::sin(n * zfrac);
            acc += (1.0 + x * x) * sn * sn;
        }
    } else {
        acc = 0.5; // TEM mode, z-independent
        for (int n = 1; n <= n_max; ++n) {
            const double x = n / u;
            const double cn = std::cos(n * zfrac);
            acc += (1.0 - x * x) * cn * cn;
        }
        acc *= 2.0;
    }
    return 1.5 / u * acc;
}

double corrected_inhibition(double gamma_par_ratio, double gamma_perp_ratio,
                            double theta_sq_bar) {
    return gamma_par_ratio + gamma_perp_ratio * theta_sq_bar;
}

double survival_probability(double gamma0, double gamma_perp_ratio,
                            const std::vector<double>& t,
                            const std::vector<double>& theta) {
    if (t.size() != theta.size() || t.size() < 2)
        throw DomainError("survival_probability: need matching t/theta samples");
    std::vector<double> th2(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) th2[i] = theta[i] * theta[i];
    return std::exp(-gamma0 * gamma_perp_ratio * num::trapezoid(t, th2));
}

double thermal_occupation(double nu_hz, double temperature_k) {
    if (temperature_k <= 0.0) return 0.0;
    return 1.0 / std::expm1(si::h * nu_hz / (si::kB * temperature_k));
}

BlackbodyResult blackbody_rates(const RydbergLevel& level, double temperature_k,
                                const CavitySpec& cavity, double field_vpm,
                                int n_manifolds) {
    require_valid(level);
    if (!level.circular())
        throw DomainError("blackbody_rates: implemented for the circular levels");
    BlackbodyResult out;
    for (int np = level.n + 1; np <= level.n + n_manifolds; ++np) {
        const int states = np - std::abs(level.m);
        for (int n1 = 0; n1 < states; ++n1) {
            const RydbergLevel to{np, n1, level.m};
            const double d = hydrogen::dipole_q(to, level, 0);
            if (d == 0.0) continue;
            const double nu = UnitSystem::au_to_hz(
                stark::perturbative_energy_au(to, field_vpm) -
                stark::perturbative_energy_au(level, field_vpm));
            if (nu <= 0.0) continue;
            CavitySpec at_channel = cavity;
            at_channel.lambda = si::c / nu;
            const double exalt = decay_ratio(at_channel, DipoleOrientation::perpendicular);
            const double rate = thermal_occupation(nu, temperature_k) *
                                hydrogen::einstein_a(nu, d) * exalt;
            if (rate > 0.0) out.channels.push_back({to, nu, rate});
            out.total_rate_per_s += rate;
        }
    }
    return out;
}

} // namespace ryd::emission
