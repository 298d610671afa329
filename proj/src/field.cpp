#include "ryd/field.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ryd/constants.hpp"

namespace ryd::field {

HarmonicDerivs solid_harmonics(const Eigen::Vector3d& r) {
    HarmonicDerivs h;
    const double r2 = r.squaredNorm();
    const Eigen::Vector3d uz(0.0, 0.0, 1.0);
    const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();

    h.value[0] = 1.0;
    h.grad[0].setZero();
    h.hess[0].setZero();
    h.value[1] = r.z();
    h.grad[1] = uz;
    h.hess[1].setZero();

    for (int l = 2; l <= 7; ++l) {
        const double a = (2.0 * l - 1.0) / l;
        const double b = (l - 1.0) / l;
        const double v1 = h.value[l - 1];
        const double v2 = h.value[l - 2];
        const Eigen::Vector3d g1 = h.grad[l - 1];
        const Eigen::Vector3d g2 = h.grad[l - 2];

        h.value[l] = a * r.z() * v1 - b * r2 * v2;
        h.grad[l] = a * (v1 * uz + r.z() * g1) - b * (2.0 * v2 * r + r2 * g2);
        h.hess[l] = a * (uz * g1.transpose() + g1 * uz.transpose() + r.z() * h.hess[l - 1]) -
                    b * (2.0 * v2 * id + 2.0 * (r * g2.transpose() + g2 * r.transpose()) +
                         r2 * h.hess[l - 2]);
    }
    return h;
}

HarmonicPotential::HarmonicPotential(std::string geometry, double z0_m,
                                     double validity_radius_m,
                                     const Eigen::Matrix<double, 3, 7>& v, double eta)
    : geometry_(std::move(geometry)), z0_(z0_m), validity_(validity_radius_m),
      eta_(eta), v_(v) {
    if (z0_ <= 0 || validity_ <= 0)
        throw DomainError("HarmonicPotential: z0 and validity radius must be positive");
}

void HarmonicPotential::require_inside(const Eigen::Vector3d& r) const {
    if (!inside(r))
        throw OutOfBoundsError("position |r|=" + std::to_string(r.norm()) +
                               " m outside validity sphere of " + geometry_ + " (" +
                               std::to_string(validity_) + " m)");
}

double DriveSettings::u3(double t) const { return u30 * std::cos(omega * t); }

void DriveSettings::validate() const {
    if (!(std::isfinite(u1) && std::isfinite(u2) && std::isfinite(u30)))
        throw DomainError("DriveSettings: voltages must be finite");
    if (!(omega > 0.0)) throw DomainError("DriveSettings: omega must be positive");
}

namespace {
// sqrt((2l+1)/4pi), l = 0..7
const double kNorm[8] = {
    0.28209479177387814, 0.48860251190291992, 0.63078313050504009,
    0.74635266518023078, 0.84628437532163443, 0.93560257962738882,
    1.0171072362820548,  1.0925484305920792,
};
} // namespace

double potential(const HarmonicPotential& hp, const DriveSettings& drive,
                 const Eigen::Vector3d& r, double t) {
    hp.require_inside(r);
    const auto sh = solid_harmonics(r);
    const double uk[3] = {drive.u1, drive.u2, drive.u3(t)};
    double v = 0.0;
    double scale = 1.0 / hp.z0();
    for (int l = 1; l <= 7; ++l) {
        double c = 0.0;
        for (int k = 1; k <= 3; ++k) c += hp.v(k, l) * uk[k - 1];
        v += c * kNorm[l] * sh.value[l] * scale;
        scale /= hp.z0();
    }
    return v;
}

FieldSample field(const HarmonicPotential& hp, const DriveSettings& drive,
                  const Eigen::Vector3d& r, double t) {
    hp.require_inside(r);
    const auto sh = solid_harmonics(r);
    const double uk[3] = {drive.u1, drive.u2, drive.u3(t)};

    Eigen::Vector3d grad_v = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hess_v = Eigen::Matrix3d::Zero();
    double scale = 1.0 / hp.z0();
    for (int l = 1; l <= 7; ++l) {
        double c = 0.0;
        for (int k = 1; k <= 3; ++k) c += hp.v(k, l) * uk[k - 1];
        c *= kNorm[l] * scale;
        grad_v += c * sh.grad[l];
        hess_v += c * sh.hess[l];
        scale /= hp.z0();
    }

    FieldSample s;
    s.evec = -grad_v;
    s.jacobian = -hess_v;
    s.modulus = s.evec.norm();
    if (s.modulus > 0.0) {
        // angle to the bias axis; the electrode polarity that fixes the sign
        // of E_z is a gauge choice, so measure against +/- u_z
        s.tilt = std::acos(std::clamp(std::abs(s.evec.z()) / s.modulus, -1.0, 1.0));
        s.grad_modulus = s.jacobian * (s.evec / s.modulus);
    }
    return s;
}

Eigen::Vector3d field_of_pattern(const HarmonicPotential& hp, int k,
                                 const Eigen::Vector3d& r) {
    const auto sh = solid_harmonics(r);
    Eigen::Vector3d grad_v = Eigen::Vector3d::Zero();
    double scale = 1.0 / hp.z0();
    for (int l = 1; l <= 7; ++l) {
        grad_v += hp.v(k, l) * kNorm[l] * scale * sh.grad[l];
        scale /= hp.z0();
    }
    return -grad_v;
}

Eigen::Matrix<double, 1, 7> synthesize_eta(const Eigen::Matrix<double, 1, 7>& row_a,
                                           double eta_a,
                                           const Eigen::Matrix<double, 1, 7>& row_b,
                                           double eta_b, double eta) {
    if (eta_a == eta_b)
        throw DomainError("synthesize_eta: input rows have identical eta");
    const double w = (eta - eta_a) / (eta_b - eta_a);
    return row_a + w * (row_b - row_a);
}

QuadLinCoefficients quad_lin_coefficients(const HarmonicPotential& hp, double alpha_j) {
    QuadLinCoefficients out;
    const double z0 = hp.z0();
    out.quad = alpha_j * (3.0 * std::sqrt(21.0) / (4.0 * pi)) * hp.v(1, 1) * hp.v(3, 3) /
               (z0 * z0 * z0 * z0);
    out.lin = alpha_j * (std::sqrt(15.0) / pi) * hp.v(1, 1) * hp.v(2, 2) / (z0 * z0 * z0);
    return out;
}

double gravity_compensation_u2(const HarmonicPotential& hp, double alpha_j,
                               double mass_kg, double u1) {
    const auto ql = quad_lin_coefficients(hp, alpha_j);
    if (ql.lin == 0.0 || u1 == 0.0)
        throw DomainError("gravity_compensation_u2: degenerate geometry or zero bias");
    return -mass_kg * si::g_earth / (ql.lin * u1);
}

CoefficientTable load_coefficients_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open coefficient file " + path);
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("empty coefficient file " + path);
    CoefficientTable table;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        if (cols.size() != 12)
            throw std::runtime_error("bad coefficient row (need 12 columns): " + line);
        CoefficientTable::Row row;
        row.geometry = cols[0];
        row.k = std::stoi(cols[1]);
        row.eta = cols[2].empty() ? std::nan("") : std::stod(cols[2]);
        for (int l = 0; l < 7; ++l) row.v(0, l) = std::stod(cols[3 + l]);
        row.z0_m = std::stod(cols[10]);
        row.validity_radius_m = std::stod(cols[11]);
        table.rows.push_back(row);
    }
    return table;
}

void save_coefficients_csv(const std::string& path, const CoefficientTable& table) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "geometry,k,eta,l1,l2,l3,l4,l5,l6,l7,z0_m,validity_radius_m\n";
    f.precision(12);
    for (const auto& row : table.rows) {
        f << row.geometry << ',' << row.k << ',';
        if (!std::isnan(row.eta)) f << row.eta;
        for (int l = 0; l < 7; ++l) f << ',' << row.v(0, l);
        f << ',' << row.z0_m << ',' << row.validity_radius_m << '\n';
    }
}

HarmonicPotential CoefficientTable::assemble(const std::string& geometry,
                                             double eta) const {
    Eigen::Matrix<double, 3, 7> v = Eigen::Matrix<double, 3, 7>::Zero();
    double z0 = 0.0, validity = 0.0;
    bool have_k1 = false, have_k2 = false;
    std::vector<const Row*> k3_rows;
    for (const auto& row : rows) {
        if (row.geometry != geometry) continue;
        z0 = row.z0_m;
        validity = row.validity_radius_m;
        if (row.k == 1) { v.row(0) = row.v; have_k1 = true; }
        if (row.k == 2) { v.row(1) = row.v; have_k2 = true; }
        if (row.k == 3) k3_rows.push_back(&row);
    }
    if (!have_k1 || !have_k2 || k3_rows.empty())
        throw std::runtime_error("coefficient table: geometry '" + geometry +
                                 "' incomplete or unknown");
    const Row* exact = nullptr;
    for (const Row* r3 : k3_rows)
        if (std::abs(r3->eta - eta) < 1e-9 * std::max(1.0, std::abs(eta))) exact = r3;
    if (exact) {
        v.row(2) = exact->v;
    } else if (k3_rows.size() >= 2) {
        v.row(2) = synthesize_eta(k3_rows[0]->v, k3_rows[0]->eta,
                                  k3_rows[1]->v, k3_rows[1]->eta, eta);
    } else {
        throw std::runtime_error("coefficient table: cannot synthesize eta=" +
                                 std::to_string(eta) + " from a single k=3 row");
    }
    return HarmonicPotential(geometry, z0, validity, v, eta);
}

} // namespace ryd::field
