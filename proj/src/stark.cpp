#include "ryd/stark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ryd/constants.hpp"
#include "ryd/hydrogen.hpp"
#include "ryd/numeric.hpp"

namespace ryd::stark {

double energy_order0_au(const RydbergLevel& lv) {
    require_valid(lv);
    return -0.5 / (double(lv.n) * lv.n);
}

double energy_order1_au(const RydbergLevel& lv, double field_vpm) {
    require_valid(lv);
    const double e = UnitSystem::field_to_au(field_vpm);
    const int k = lv.n - 2 * lv.n1 - std::abs(lv.m) - 1; // = n2 - n1
    return -1.5 * double(k) * lv.n * e;
}

double energy_order2_au(const RydbergLevel& lv, double field_vpm) {
    require_valid(lv);
    const double e = UnitSystem::field_to_au(field_vpm);
    const double n = lv.n;
    const double k = lv.n - 2 * lv.n1 - std::abs(lv.m) - 1;
    const double bracket = 17.0 * n * n - 9.0 * lv.m * lv.m + 19.0 - 3.0 * k * k;
    return -bracket * n * n * n * n * e * e / 16.0;
}

double perturbative_energy_au(const RydbergLevel& lv, double field_vpm) {
    if (field_vpm < 0) throw DomainError("perturbative_energy: field must be >= 0");
    return energy_order0_au(lv) + energy_order1_au(lv, field_vpm) +
           energy_order2_au(lv, field_vpm);
}

double perturbative_shift_hz(const RydbergLevel& lv, double field_vpm) {
    if (field_vpm < 0) throw DomainError("perturbative_shift: field must be >= 0");
    return UnitSystem::au_to_hz(energy_order1_au(lv, field_vpm) +
                                energy_order2_au(lv, field_vpm));
}

double linear_stark_slope(const RydbergLevel& lv) {
    require_valid(lv);
    const int k = lv.n - 2 * lv.n1 - std::abs(lv.m) - 1;
    return -1.5 * double(k) * lv.n * UnitSystem::slope_au_to_si;
}

double quadratic_stark_coefficient(const RydbergLevel& lv) {
    require_valid(lv);
    const double n = lv.n;
    const double k = lv.n - 2 * lv.n1 - std::abs(lv.m) - 1;
    const double bracket = 17.0 * n * n - 9.0 * lv.m * lv.m + 19.0 - 3.0 * k * k;
    return -bracket * n * n * n * n / 16.0 * UnitSystem::curv_au_to_si;
}

StarkBlock::StarkBlock(int m, int n_lowest, int manifolds)
    : m_(m), n_lo_(n_lowest), m_count_(manifolds) {
    if (manifolds < 1) throw DomainError("StarkBlock: need at least one manifold");
    if (n_lowest < std::abs(m) + 1)
        throw DomainError("StarkBlock: n_lowest below |m|+1");

    int dim = 0;
    for (int n = n_lo_; n < n_lo_ + m_count_; ++n) dim += n - std::abs(m_);

    sph_l_.reserve(dim);
    sph_n_.reserve(dim);
    diag_au_.resize(dim);
    origin_au_ = -0.5 / (double(n_lo_) * n_lo_);
    parab_to_sph_ = Eigen::MatrixXd::Zero(dim, dim);

    int offset = 0;
    for (int n = n_lo_; n < n_lo_ + m_count_; ++n) {
        const auto pe = hydrogen::parabolic_expansion(n, m_);
        const int sz = pe.basis.size();
        for (int i = 0; i < sz; ++i) {
            sph_n_.push_back(n);
            sph_l_.push_back(pe.basis.l_of(i));
            diag_au_[offset + i] = -0.5 / (double(n) * n) - origin_au_;
        }
        for (int j = 0; j < sz; ++j) levels_.push_back(RydbergLevel{n, j, m_});
        parab_to_sph_.block(offset, offset, sz, sz) = pe.coeff;
        offset += sz;
    }

    z_au_ = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            if (std::abs(sph_l_[i] - sph_l_[j]) != 1) continue;
            const double el =
                hydrogen::radial_integral(sph_n_[i], sph_l_[i], sph_n_[j], sph_l_[j]) *
                hydrogen::angular_factor(sph_l_[j], m_, sph_l_[i], 0);
            z_au_(i, j) = el;
            z_au_(j, i) = el;
        }
    }
}

Eigen::MatrixXd StarkBlock::hamiltonian_au(double field_vpm) const {
    Eigen::MatrixXd h = UnitSystem::field_to_au(field_vpm) * z_au_;
    h.diagonal() += diag_au_;
    return h;
}

int StarkBlock::index_of(const RydbergLevel& lv) const {
    for (int i = 0; i < size(); ++i)
        if (levels_[i] == lv) return i;
    throw DomainError("StarkBlock: level " + lv.str() + " not in block");
}

StarkBlock::Eigs StarkBlock::diagonalize(double field_vpm) const {
    if (field_vpm < 0.0 || field_vpm > kFitFieldMax)
        throw OutOfRangeError("StarkBlock: field " + std::to_string(field_vpm) +
                              " V/m outside fitted range [0," +
                              std::to_string(kFitFieldMax) + "]");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonian_au(field_vpm));

    // Adiabatic labels: rank-match against the perturbative ordering.
    const int dim = size();
    std::vector<int> order(dim);
    for (int i = 0; i < dim; ++i) order[i] = i;
    std::vector<double> pt(dim);
    for (int i = 0; i < dim; ++i)
        pt[i] = perturbative_energy_au(levels_[i], std::max(field_vpm, 1e-6));
    std::sort(order.begin(), order.end(), [&](int a, int b) { return pt[a] < pt[b]; });

    Eigs out;
    out.labels.resize(dim);
    out.energy_hz.resize(dim);
    out.energy_abs_hz.resize(dim);
    out.vectors.resize(dim, dim);
    for (int rank = 0; rank < dim; ++rank) {
        const int idx = order[rank]; // level holding this energy rank
        const RydbergLevel& lv = levels_[idx];
        const double e_au = es.eigenvalues()[rank] + origin_au_;
        out.labels[idx] = lv;
        out.energy_abs_hz[idx] = UnitSystem::au_to_hz(es.eigenvalues()[rank]);
        out.energy_hz[idx] = UnitSystem::au_to_hz(e_au - energy_order0_au(lv));
        out.vectors.col(idx) = es.eigenvectors().col(rank);
    }
    return out;
}

double StarkPolynomial::shift_hz(double field_vpm) const {
    if (field_vpm < e_min || field_vpm > e_max)
        throw OutOfRangeError("StarkPolynomial: field " + std::to_string(field_vpm) +
                              " outside [" + std::to_string(e_min) + "," +
                              std::to_string(e_max) + "]");
    return num::polyval(coeffs, field_vpm);
}

StarkPolynomial fit_polynomial_data(const RydbergLevel& lv, const Eigen::VectorXd& fields,
                                    const Eigen::VectorXd& shifts_hz, int order,
                                    double tol_hz) {
    if (fields.size() < 50)
        throw DomainError("fit_polynomial: need a grid of at least 50 points");
    StarkPolynomial p;
    p.level = lv;
    p.e_min = fields.minCoeff();
    p.e_max = fields.maxCoeff();
    p.coeffs = num::polyfit(fields, shifts_hz, order);
    double worst = 0.0;
    for (int i = 0; i < fields.size(); ++i)
        worst = std::max(worst, std::abs(num::polyval(p.coeffs, fields[i]) - shifts_hz[i]));
    p.max_residual_hz = worst;
    if (worst > tol_hz)
        throw FitFailure("fit_polynomial: residual " + std::to_string(worst) +
                         " Hz exceeds " + std::to_string(tol_hz) + " Hz for " + lv.str(),
                         worst);
    return p;
}

StarkPolynomial fit_polynomial(const StarkBlock& block, const RydbergLevel& lv,
                               const Eigen::VectorXd& field_grid, int order,
                               double tol_hz) {
    const int idx = block.index_of(lv);
    Eigen::VectorXd shifts(field_grid.size());
    for (int i = 0; i < field_grid.size(); ++i)
        shifts[i] = block.diagonalize(field_grid[i]).energy_hz[idx];
    return fit_polynomial_data(lv, field_grid, shifts, order, tol_hz);
}

void save_polynomials_csv(const std::string& path, const std::vector<StarkPolynomial>& polys) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "n,n1,m,c0,c1,c2,c3,c4,Emin,Emax\n";
    f.precision(17);
    for (const auto& p : polys) {
        f << p.level.n << ',' << p.level.n1 << ',' << p.level.m;
        for (int k = 0; k < 5; ++k) f << ',' << (k < p.coeffs.size() ? p.coeffs[k] : 0.0);
        f << ',' << p.e_min << ',' << p.e_max << '\n';
    }
}

std::vector<StarkPolynomial> load_polynomials_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty polynomial file " + path);
    std::vector<StarkPolynomial> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> v;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        if (v.size() != 10) throw std::runtime_error("bad polynomial row: " + line);
        StarkPolynomial p;
        p.level = RydbergLevel{int(v[0]), int(v[1]), int(v[2])};
        p.coeffs.resize(5);
        for (int k = 0; k < 5; ++k) p.coeffs[k] = v[3 + k];
        p.e_min = v[8];
        p.e_max = v[9];
        out.push_back(p);
    }
    return out;
}

} // namespace ryd::stark
