#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ryd/level.hpp"

namespace ryd::stark {

// Second-order perturbative Stark energy, a.u., relative to the atom's
// zero-field continuum origin (i.e. including -1/(2n^2)).
double perturbative_energy_au(const RydbergLevel& lv, double field_vpm);

// Same split out by order.
double energy_order0_au(const RydbergLevel& lv);
double energy_order1_au(const RydbergLevel& lv, double field_vpm);
double energy_order2_au(const RydbergLevel& lv, double field_vpm);

// Perturbative energy in Hz relative to the level's own zero-field energy.
double perturbative_shift_hz(const RydbergLevel& lv, double field_vpm);

// d(energy)/dE at E=0 in Hz/(V/m); zero for circular states.
double linear_stark_slope(const RydbergLevel& lv);

// Quadratic Stark coefficient (alpha_i of the text), Hz/(V/m)^2.
double quadratic_stark_coefficient(const RydbergLevel& lv);

inline constexpr double kFitFieldMax = 1000.0; // V/m, fitted range of the tables

class OutOfRangeError : public std::runtime_error {
public:
    explicit OutOfRangeError(const std::string& w) : std::runtime_error(w) {}
};

// Stark Hamiltonian at fixed m over manifolds n_lowest .. n_lowest+M-1,
// built in the spherical basis, labeled by parabolic numbers through the
// within-manifold permanent-dipole ordering.
class StarkBlock {
public:
    StarkBlock(int m, int n_lowest, int manifolds);

    int size() const { return int(levels_.size()); }
    const std::vector<RydbergLevel>& levels() const { return levels_; }

    // Hamiltonian in a.u. with the energy origin at the zero-field energy of
    // the block's lowest manifold.
    Eigen::MatrixXd hamiltonian_au(double field_vpm) const;

    struct Eigs {
        std::vector<RydbergLevel> labels;
        Eigen::VectorXd energy_hz;   // relative to each level's zero-field energy
        Eigen::VectorXd energy_abs_hz; // relative to block origin
        Eigen::MatrixXd vectors;     // columns in label order, spherical basis
    };
    // Requires 0 <= field <= kFitFieldMax (the validity of the downstream fits).
    Eigs diagonalize(double field_vpm) const;

    // index of a level in label order
    int index_of(const RydbergLevel& lv) const;

    // block-diagonal basis change from parabolic labels to the spherical basis
    const Eigen::MatrixXd& parabolic_to_spherical() const { return parab_to_sph_; }

private:
    int m_;
    int n_lo_;
    int m_count_;
    std::vector<RydbergLevel> levels_;     // manifold-major, n1 ascending
    Eigen::MatrixXd z_au_;                 // z operator, spherical basis
    Eigen::VectorXd diag_au_;              // zero-field energies minus origin
    Eigen::MatrixXd parab_to_sph_;         // block-diagonal basis change
    double origin_au_ = 0.0;
    std::vector<int> sph_l_;               // l per spherical basis index
    std::vector<int> sph_n_;
};

// Energy-vs-field polynomial for one level. Coefficients in Hz/(V/m)^k,
// relative to the zero-field energy.
struct StarkPolynomial {
    RydbergLevel level;
    Eigen::VectorXd coeffs;  // c0..c4
    double e_min = 0.0;
    double e_max = kFitFieldMax;
    double max_residual_hz = 0.0;

    double shift_hz(double field_vpm) const; // throws OutOfRangeError outside range
};

class FitFailure : public std::runtime_error {
public:
    FitFailure(const std::string& w, double residual)
        : std::runtime_error(w), residual_hz(residual) {}
    double residual_hz;
};

// Least-squares fit of the diagonalized energy over [0, kFitFieldMax];
// residual above tol_hz throws FitFailure. grid must have >= 50 points.
StarkPolynomial fit_polynomial(const StarkBlock& block, const RydbergLevel& lv,
                               const Eigen::VectorXd& field_grid, int order = 4,
                               double tol_hz = 0.5);

// Fit from precomputed samples (exposed for synthetic inputs and tests).
StarkPolynomial fit_polynomial_data(const RydbergLevel& lv, const Eigen::VectorXd& fields,
                                    const Eigen::VectorXd& shifts_hz, int order,
                                    double tol_hz);

// CSV round trip: columns n,n1,m,c0,c1,c2,c3,c4,Emin,Emax
void save_polynomials_csv(const std::string& path, const std::vector<StarkPolynomial>& polys);
std::vector<StarkPolynomial> load_polynomials_csv(const std::string& path);

} // namespace ryd::stark
