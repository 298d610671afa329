#include "ryd/hydrogen.hpp"

#include <cmath>

#include "ryd/constants.hpp"

namespace ryd::hydrogen {

double angular_factor(int l_from, int m_from, int l_to, int q) {
    const int l = l_from, m = m_from;
    if (l_to == l + 1) {
        switch (q) {
            case 0:  return std::sqrt(double((l + 1) * (l + 1) - m * m) /
                                      double((2 * l + 1) * (2 * l + 3)));
            case 1:  return -std::sqrt(double((l + m + 1) * (l + m + 2)) /
                                       double(2 * (2 * l + 1) * (2 * l + 3)));
            case -1: return std::sqrt(double((l - m + 1) * (l - m + 2)) /
                                      double(2 * (2 * l + 1) * (2 * l + 3)));
        }
    } else if (l_to == l - 1) {
        switch (q) {
            case 0:  return std::sqrt(double(l * l - m * m) /
                                      double((2 * l - 1) * (2 * l + 1)));
            case 1:  return std::sqrt(double((l - m) * (l - m - 1)) /
                                      double(2 * (2 * l - 1) * (2 * l + 1)));
            case -1: return -std::sqrt(double((l + m) * (l + m - 1)) /
                                       double(2 * (2 * l - 1) * (2 * l + 1)));
        }
    }
    return 0.0;
}

namespace {

// Finite 2F1(-a, -b; c; x) for non-negative integers a, b.
double hyp2f1_poly(int a, int b, int c, double x) {
    const int kmax = std::min(a, b);
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < kmax; ++k) {
        term *= double(-(a - k)) * double(-(b - k)) / (double(c + k) * double(k + 1)) * x;
        sum += term;
    }
    return sum;
}

double gordon_integral(int n_upper_l, int l, int n_lower_l) {
    // <n', l-1 | r | n, l> with n = n_upper_l carrying l, n' carrying l-1.
    const int n = n_upper_l, np = n_lower_l;
    const int nr = n - l - 1;   // radial nodes of (n, l)
    const int nrp = np - l;     // of (n', l-1)
    const double x = -4.0 * double(n) * double(np) / double((n - np) * (n - np));
    const double f1 = hyp2f1_poly(nr, nrp, 2 * l, x);
    const double f2 = hyp2f1_poly(nr + 2, nrp, 2 * l, x);
    const double ratio = double(n - np) / double(n + np);
    const double bracket = f1 - ratio * ratio * f2;

    double logpre = -std::log(4.0) - std::lgamma(2.0 * l);
    logpre += 0.5 * (std::lgamma(n + l + 1.0) + std::lgamma(np + l + 0.0) -
                     std::lgamma(n - l + 0.0) - std::lgamma(np - l + 1.0));
    logpre += (l + 1.0) * std::log(4.0 * n * np);
    logpre += (n + np - 2.0 * l - 2.0) * std::log(std::abs(double(n - np)));
    logpre -= (n + np) * std::log(double(n + np));

    double sign = ((np - l) % 2 == 0) ? 1.0 : -1.0;
    if (n - np < 0 && ((n + np - 2 * l - 2) % 2 != 0)) sign = -sign;
    return sign * std::exp(logpre) * bracket;
}

} // namespace

double radial_integral(int n1, int l1, int n2, int l2) {
    if (std::abs(l1 - l2) != 1)
        throw DomainError("radial_integral: |l1-l2| must be 1");
    // order so that (n, l) carries the larger l
    int n = n1, l = l1, np = n2;
    if (l2 > l1) { n = n2; l = l2; np = n1; }
    if (l > n - 1 || l - 1 > np - 1 || n < 1 || np < 1)
        throw DomainError("radial_integral: invalid (n,l) pair");
    // Same-n sign follows the positive-normalized Laguerre convention used by
    // the Gordon branch; the two interfere in higher-order Stark paths.
    if (n == np) return -1.5 * n * std::sqrt(double(n) * n - double(l) * l);
    return gordon_integral(n, l, np);
}

ParabolicExpansion parabolic_expansion(int n, int m) {
    ParabolicExpansion out;
    out.basis = ManifoldBasis{n, m};
    const int sz = out.basis.size();
    if (sz <= 0) throw DomainError("parabolic_expansion: empty manifold");

    // z restricted to the manifold, tridiagonal in l
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(sz, sz);
    for (int i = 0; i + 1 < sz; ++i) {
        const int l = out.basis.l_of(i);
        const double el = radial_integral(n, l, n, l + 1) * angular_factor(l, m, l + 1, 0);
        z(i, i + 1) = el;
        z(i + 1, i) = el;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z);
    out.coeff = es.eigenvectors();     // ascending <z>; column j <-> n1 = j
    out.z_expect = es.eigenvalues();
    for (int j = 0; j < sz; ++j)
        if (out.coeff(sz - 1, j) < 0.0) out.coeff.col(j) *= -1.0;
    return out;
}

double z_matrix_element(const RydbergLevel& a, const RydbergLevel& b) {
    return dipole_q(a, b, 0);
}

double dipole_q(const RydbergLevel& a, const RydbergLevel& b, int q) {
    require_valid(a);
    require_valid(b);
    if (a.m != b.m + q) throw DomainError("dipole_q: m mismatch for component q");
    if (a.n == b.n && q == 0) {
        // z is diagonal within a manifold at fixed m
        if (a.n1 != b.n1) return 0.0;
        const auto pe = parabolic_expansion(a.n, a.m);
        return pe.z_expect[a.n1];
    }
    const auto pa = parabolic_expansion(a.n, a.m);
    const auto pb = parabolic_expansion(b.n, b.m);
    double acc = 0.0;
    for (int ia = 0; ia < pa.basis.size(); ++ia) {
        const int la = pa.basis.l_of(ia);
        const double ca = pa.coeff(ia, a.n1);
        if (ca == 0.0) continue;
        for (int ib = 0; ib < pb.basis.size(); ++ib) {
            const int lb = pb.basis.l_of(ib);
            if (std::abs(la - lb) != 1) continue;
            const double cb = pb.coeff(ib, b.n1);
            if (cb == 0.0) continue;
            // <a| r_q |b>: operator takes (lb, mb) -> (la, ma)
            acc += ca * cb * radial_integral(a.n, la, b.n, lb) *
                   angular_factor(lb, b.m, la, q);
        }
    }
    return acc;
}

double dipole_matrix_element(const RydbergLevel& a, const RydbergLevel& b,
                             Polarization pol) {
    require_valid(a);
    require_valid(b);
    const int dm = a.m - b.m;
    if (pol == Polarization::pi) {
        if (dm != 0)
            throw DomainError("dipole_matrix_element: pi light requires equal m, got dm=" +
                              std::to_string(dm));
        return dipole_q(a, b, 0);
    }
    if (std::abs(dm) != 1)
        throw DomainError("dipole_matrix_element: sigma light requires |dm|=1, got dm=" +
                          std::to_string(dm));
    return std::abs(dipole_q(a, b, dm));
}

double einstein_a(double nu_hz, double dipole_au) {
    const double omega = two_pi * nu_hz;
    const double d = dipole_au * si::qe * si::a0;
    return omega * omega * omega * d * d /
           (3.0 * pi * si::eps0 * si::hbar * si::c * si::c * si::c);
}

} // namespace ryd::hydrogen
