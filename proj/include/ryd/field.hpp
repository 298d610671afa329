#pragma once
#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ryd/level.hpp"

namespace ryd::field {

// Value, gradient and Hessian of the m=0 solid harmonics r^l P_l(z/r),
// l = 0..7, evaluated recursively.
struct HarmonicDerivs {
    std::array<double, 8> value{};
    std::array<Eigen::Vector3d, 8> grad{};
    std::array<Eigen::Matrix<double, 3, 3>, 8> hess{};
};
HarmonicDerivs solid_harmonics(const Eigen::Vector3d& r);

class OutOfBoundsError : public std::runtime_error {
public:
    explicit OutOfBoundsError(const std::string& w) : std::runtime_error(w) {}
};

// Spherical-harmonic trap potential model: coefficients v_kl for the three
// electrode voltage patterns, k = 1..3, l = 1..7, orthonormal Y_l^0.
class HarmonicPotential {
public:
    HarmonicPotential() = default;
    HarmonicPotential(std::string geometry, double z0_m, double validity_radius_m,
                      const Eigen::Matrix<double, 3, 7>& v, double eta);

    const std::string& geometry() const { return geometry_; }
    double z0() const { return z0_; }
    double validity_radius() const { return validity_; }
    double eta() const { return eta_; }
    const Eigen::Matrix<double, 3, 7>& coeffs() const { return v_; }
    double v(int k, int l) const { return v_(k - 1, l - 1); }

    bool inside(const Eigen::Vector3d& r) const { return r.norm() <= validity_; }
    void require_inside(const Eigen::Vector3d& r) const;

private:
    std::string geometry_ = "unset";
    double z0_ = 1e-3;
    double validity_ = 4e-4;
    double eta_ = 1.0;
    Eigen::Matrix<double, 3, 7> v_ = Eigen::Matrix<double, 3, 7>::Zero();
};

struct DriveSettings {
    double u1 = 0.0;      // V, static bias
    double u2 = 0.0;      // V, static quadrupole-ish
    double u30 = 0.0;     // V, a.c. amplitude: U3(t) = u30 cos(omega t)
    double omega = 1.0;   // rad/s
    double u3(double t) const;
    void validate() const;
};

struct FieldSample {
    Eigen::Vector3d evec = Eigen::Vector3d::Zero(); // V/m
    double modulus = 0.0;                           // V/m
    double tilt = 0.0;                              // rad, angle to u_z
    Eigen::Vector3d grad_modulus = Eigen::Vector3d::Zero(); // d|E|/dr, V/m^2
    Eigen::Matrix3d jacobian = Eigen::Matrix3d::Zero();     // dE_i/dr_j
};

// Potential in volts at position r (meters, centred on the trap origin).
double potential(const HarmonicPotential& hp, const DriveSettings& drive,
                 const Eigen::Vector3d& r, double t);

// Field vector, modulus and tilt from the closed-form gradient.
FieldSample field(const HarmonicPotential& hp, const DriveSettings& drive,
                  const Eigen::Vector3d& r, double t);

// Per-voltage-pattern field at unit U_k (for linearity checks and fast paths).
Eigen::Vector3d field_of_pattern(const HarmonicPotential& hp, int k,
                                 const Eigen::Vector3d& r);

// v_3l row synthesized at a new eta from two rows at distinct eta values
// (each coefficient is affine in eta).
Eigen::Matrix<double, 1, 7> synthesize_eta(const Eigen::Matrix<double, 1, 7>& row_a,
                                           double eta_a,
                                           const Eigen::Matrix<double, 1, 7>& row_b,
                                           double eta_b, double eta);

// Leading terms of the potential energy for a trap-A-like geometry:
//   quad * U1*U3(t) * (2z^2 - x^2 - y^2)  and  lin * U1*U2 * z
// where quad and lin carry the alpha and v-coefficients; alpha in J/(V/m)^2.
struct QuadLinCoefficients {
    double quad = 0.0; // J/m^2 per V^2
    double lin = 0.0;  // J/m per V^2
};
QuadLinCoefficients quad_lin_coefficients(const HarmonicPotential& hp, double alpha_j);

// U2 that cancels gravity for a trap-A-like geometry at bias U1.
double gravity_compensation_u2(const HarmonicPotential& hp, double alpha_j,
                               double mass_kg, double u1);

// Coefficient table I/O. CSV header:
// geometry,k,eta,l1,l2,l3,l4,l5,l6,l7,z0_m,validity_radius_m
struct CoefficientTable {
    struct Row {
        std::string geometry;
        int k = 0;
        double eta = 0.0;   // NaN when not applicable (k != 3)
        Eigen::Matrix<double, 1, 7> v;
        double z0_m = 0.0;
        double validity_radius_m = 0.0;
    };
    std::vector<Row> rows;

    // Assemble a potential for a geometry, choosing (or synthesizing) the
    // k=3 row at the requested eta.
    HarmonicPotential assemble(const std::string& geometry, double eta) const;
};
CoefficientTable load_coefficients_csv(const std::string& path);
void save_coefficients_csv(const std::string& path, const CoefficientTable& table);

} // namespace ryd::field
