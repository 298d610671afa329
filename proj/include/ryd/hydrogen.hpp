#pragma once
#include <Eigen/Dense>

#include "ryd/level.hpp"

namespace ryd::hydrogen {

enum class Polarization { pi, sigma_plus, sigma_minus };

// <n' l' m| dipole angular factor |n l m+q> for r_q = r C^1_q; zero unless
// |l'-l| = 1. q is the spherical component (0, +1, -1).
double angular_factor(int l_from, int m_from, int l_to, int q);

// Hydrogenic radial integral <n1 l1| r |n2 l2> in a.u. (l's must differ by 1).
// Closed form: Gordon's hypergeometric expression for n1 != n2 and the
// standard same-n result. The stretched-basis states used here keep the
// hypergeometric sums short; callers with deep low-l states should not use it.
double radial_integral(int n1, int l1, int n2, int l2);

// Spherical basis for one (n, m): l = |m| .. n-1.
struct ManifoldBasis {
    int n = 0;
    int m = 0;
    int size() const { return n - std::abs(m); }
    int l_of(int idx) const { return std::abs(m) + idx; }
};

// Expansion of the parabolic states of one manifold at fixed m onto the
// spherical |n l m> basis. Column j holds the state with n1 = j; within a
// manifold the parabolic states are the eigenvectors of z with eigenvalue
// (3/2) n (n1 - n2), which fixes the expansion up to phase. Phases are fixed
// by making the highest-l component positive.
struct ParabolicExpansion {
    ManifoldBasis basis;
    Eigen::MatrixXd coeff;       // (l-index) x (n1)
    Eigen::VectorXd z_expect;    // permanent dipole <z> per n1, a.u.
};
ParabolicExpansion parabolic_expansion(int n, int m);

// z matrix element between parabolic states of equal m, a.u.
double z_matrix_element(const RydbergLevel& a, const RydbergLevel& b);

// <a| r_q |b> between parabolic states with m_a = m_b + q, a.u.
double dipole_q(const RydbergLevel& a, const RydbergLevel& b, int q);

// Public dipole element per the stated polarization selection rule.
// Returns the signed z element for pi light and the magnitude of the single
// contributing spherical component for sigma.
double dipole_matrix_element(const RydbergLevel& a, const RydbergLevel& b,
                             Polarization pol);

// Free-space spontaneous rate of |upper> -> |lower| at transition (ordinary)
// frequency nu_hz through the single component q = m_lower - m_upper, 1/s.
double einstein_a(double nu_hz, double dipole_au);

} // namespace ryd::hydrogen
