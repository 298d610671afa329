#include "ryd/dressing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ryd/constants.hpp"
#include "ryd/hydrogen.hpp"
#include "ryd/numeric.hpp"
#include "ryd/parallel.hpp"

namespace ryd::dressing {

struct DressedSystem::Block {
    int m = 0;
    std::unique_ptr<stark::StarkBlock> sb;
    std::vector<RydbergLevel> levels;
    Eigen::MatrixXd z_par0;  // zero-field z in the parabolic basis, a.u.
    Eigen::MatrixXd z_sph;   // z operator in the spherical basis, a.u.
    std::map<int, stark::StarkPolynomial> polys; // by level index
    std::vector<double> offset0_hz;              // zero-field energy re zero-field g
};

DressedSystem::DressedSystem(int m_lower, LadderOptions opts)
    : m_low_(m_lower), opts_(opts) {
    g_ = circular_state(m_lower + 1);
    e_ = circular_state(m_lower + 2);
    i_ = RydbergLevel{m_lower + 2, 0, m_lower};
    ip_ = RydbergLevel{m_lower + 2, 1, m_lower};

    for (int m = m_lower - 1; m <= m_lower + 2; ++m) {
        auto blk = std::make_shared<Block>();
        blk->m = m;
        blk->sb = std::make_unique<stark::StarkBlock>(m, m + 1, opts_.manifolds);
        blk->levels = blk->sb->levels();
        const double e0g = stark::energy_order0_au(g_);
        for (const auto& lv : blk->levels)
            blk->offset0_hz.push_back(
                UnitSystem::au_to_hz(stark::energy_order0_au(lv) - e0g));
        blk->z_sph = (blk->sb->hamiltonian_au(800.0) - blk->sb->hamiltonian_au(0.0)) /
                     UnitSystem::field_to_au(800.0);
        const Eigen::MatrixXd& p = blk->sb->parabolic_to_spherical();
        blk->z_par0 = p.transpose() * blk->z_sph * p;
        blocks_[m] = std::move(blk);
    }

    if (opts_.exact_polynomials) {
        // the polynomial basis stays fixed while the ladder size varies, so
        // (M, N) convergence probes the ladder truncation alone
        const int fit_manifolds = 6;
        Eigen::VectorXd grid =
            Eigen::VectorXd::LinSpaced(81, opts_.poly_fit_lo, opts_.poly_fit_hi);
        auto fit_into = [&](Block& blk, const RydbergLevel& lv) {
            stark::StarkBlock fit_basis(blk.m, blk.m + 1, fit_manifolds);
            blk.polys.emplace(blk.sb->index_of(lv),
                              stark::fit_polynomial(fit_basis, lv, grid, 4,
                                                    opts_.poly_fit_tol));
        };
        fit_into(*blocks_[m_low_], g_);
        fit_into(*blocks_[m_low_], i_);
        fit_into(*blocks_[m_low_], ip_);
        fit_into(*blocks_[m_low_ + 1], e_);
    }

    // reference dipole: circular -> (n+1, n1=1) element, zero field
    z_ref_ = std::abs(hydrogen::dipole_q(g_, ip_, 0));
}

const DressedSystem::Block& DressedSystem::block(int m) const {
    auto it = blocks_.find(m);
    if (it == blocks_.end())
        throw DomainError("DressedSystem: no ladder block for m=" + std::to_string(m));
    return *it->second;
}

double DressedSystem::bare_level_hz(const RydbergLevel& lv, double e_vpm) const {
    const Block& blk = block(lv.m);
    const int idx = blk.sb->index_of(lv);
    const auto it = blk.polys.find(idx);
    const double shift = (it != blk.polys.end())
                             ? it->second.shift_hz(e_vpm)
                             : stark::perturbative_shift_hz(lv, e_vpm);
    return blk.offset0_hz[idx] + shift;
}

double DressedSystem::gi_transition_hz(double e_vpm) const {
    return bare_level_hz(i_, e_vpm) - bare_level_hz(g_, e_vpm);
}

double DressedSystem::drive_frequency_hz(const OperatingPoint& op) const {
    return gi_transition_hz(op.field_anchor) - op.detuning0_hz;
}

Eigen::MatrixXd DressedSystem::ladder_hamiltonian(const Block& blk, double e_vpm,
                                                  double rabi_scale_hz,
                                                  double nu0_hz) const {
    const int n_at = int(blk.levels.size());
    const int n_ph = 2 * opts_.photon_halfwidth + 1;
    const int dim = n_at * n_ph;

    Eigen::MatrixXd z_at;
    if (opts_.field_dependent_couplings && e_vpm > 0.0) {
        const auto eig = blk.sb->diagonalize(e_vpm);
        z_at = eig.vectors.transpose() * blk.z_sph * eig.vectors;
    } else {
        z_at = blk.z_par0;
    }

    if (opts_.couple_gi_only) {
        Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n_at, n_at);
        if (blk.m == m_low_) {
            const int ig = blk.sb->index_of(g_);
            const int ii = blk.sb->index_of(i_);
            mask(ig, ii) = z_at(ig, ii);
            mask(ii, ig) = z_at(ii, ig);
        }
        z_at = mask;
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j < n_ph; ++j) {
        const double ph = (j - opts_.photon_halfwidth) * nu0_hz;
        for (int a = 0; a < n_at; ++a)
            h(a + n_at * j, a + n_at * j) = bare_level_hz(blk.levels[a], e_vpm) + ph;
    }
    const double scale = 0.5 * rabi_scale_hz / z_ref_;
    const int ig = (blk.m == m_low_) ? blk.sb->index_of(g_) : -1;
    const int ii = (blk.m == m_low_) ? blk.sb->index_of(i_) : -1;
    for (int j = 0; j + 1 < n_ph; ++j) {
        for (int a = 0; a < n_at; ++a) {
            for (int b = 0; b < n_at; ++b) {
                const double el = scale * z_at(a, b);
                if (el == 0.0) continue;
                if (opts_.resonant_pairs_only) {
                    // keep only |i, j> <-> |g, j+1>
                    if (!(a == ii && b == ig)) continue;
                }
                h(a + n_at * j, b + n_at * (j + 1)) = el;
                h(b + n_at * (j + 1), a + n_at * j) = el;
            }
        }
    }
    return h;
}

std::vector<DressedLevel> DressedSystem::build_and_diagonalize(
    int m_block, double e_vpm, double rabi_scale_hz, const OperatingPoint& op) const {
    const Block& blk = block(m_block);
    const double nu0 = drive_frequency_hz(op);
    const Eigen::MatrixXd h = ladder_hamiltonian(blk, e_vpm, rabi_scale_hz, nu0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);

    const int n_at = int(blk.levels.size());
    const int center = opts_.photon_halfwidth;
    std::vector<DressedLevel> out(n_at);
    std::vector<int> claimed(n_at, -1);
    for (int a = 0; a < n_at; ++a) {
        const int row = a + n_at * center;
        int best = -1;
        double best_w = -1.0;
        for (int k = 0; k < h.rows(); ++k) {
            const double w = es.eigenvectors()(row, k) * es.eigenvectors()(row, k);
            if (w > best_w) {
                best_w = w;
                best = k;
            }
        }
        for (int a2 = 0; a2 < a; ++a2)
            if (claimed[a2] == best)
                throw LabelingError("dressed-level association is ambiguous between " +
                                        blk.levels[a2].str() + " and " +
                                        blk.levels[a].str(),
                                    blk.levels[a2], blk.levels[a]);
        claimed[a] = best;
        out[a] = DressedLevel{blk.levels[a], es.eigenvalues()[best], best_w};
    }
    return out;
}

double DressedSystem::dressed_energy_hz(const RydbergLevel& label, double e_vpm,
                                        double rabi_hz, const OperatingPoint& op) const {
    const auto all = build_and_diagonalize(label.m, e_vpm, rabi_hz, op);
    for (const auto& dl : all)
        if (dl.label == label) return dl.energy_hz;
    throw DomainError("dressed_energy: label " + label.str() + " not in block");
}

double DressedSystem::transition_hz(double e_vpm, double rabi_hz,
                                    const OperatingPoint& op) const {
    return dressed_energy_hz(e_, e_vpm, rabi_hz, op) -
           dressed_energy_hz(g_, e_vpm, rabi_hz, op);
}

TransitionExpansion DressedSystem::transition_expansion(const OperatingPoint& op,
                                                        double h) const {
    const double ea = op.field_anchor;
    double w[5];
    std::vector<double> vals(10, 0.0);
    parallel_for(10, [&](std::size_t idx) {
        const int p = int(idx) / 2;
        const bool upper = idx % 2;
        const double e = ea + (p - 2) * h;
        vals[idx] = upper ? dressed_energy_hz(e_, e, op.rabi0_hz, op)
                          : dressed_energy_hz(g_, e, op.rabi0_hz, op);
    }, default_workers());
    for (int p = 0; p < 5; ++p) w[p] = vals[2 * p + 1] - vals[2 * p];

    TransitionExpansion out;
    out.omega_hz = w[2];
    out.linear = (-w[4] + 8.0 * w[3] - 8.0 * w[1] + w[0]) / (12.0 * h);
    out.quadratic = (-w[4] + 16.0 * w[3] - 30.0 * w[2] + 16.0 * w[1] - w[0]) /
                    (12.0 * h * h) / 2.0;
    return out;
}

double DressedSystem::rabi_sensitivity(const OperatingPoint& op,
                                       double d_omega_rel) const {
    const double w0 = transition_hz(op.field_anchor, op.rabi0_hz, op);
    const double w1 =
        transition_hz(op.field_anchor, op.rabi0_hz * (1.0 + d_omega_rel), op);
    return std::abs(w1 - w0);
}

double TwoLevelModel::omega_tilde_hz(const DressedSystem& sys, double e_vpm,
                                     const OperatingPoint& op) const {
    const double nu_ig_e = sys.gi_transition_hz(e_vpm);
    const double nu_ig_a = sys.gi_transition_hz(op.field_anchor);
    const double delta = nu_ig_e - nu_ig_a + op.detuning0_hz;

    double wscale = 1.0;
    if (drift != CouplingDrift::none) {
        const auto& lvl = (drift == CouplingDrift::follow_gi) ? sys.level_i()
                                                              : sys.level_i_prime();
        wscale = sys.coupling_dipole_au(lvl, e_vpm) /
                 sys.coupling_dipole_au(lvl, op.field_anchor);
    }
    const double rabi = op.rabi0_hz * wscale;
    const double shift = 0.5 * (std::hypot(delta, rabi) - delta);
    const double nu_eg = sys.bare_level_hz(sys.level_e(), e_vpm) -
                         sys.bare_level_hz(sys.level_g(), e_vpm);
    return nu_eg + shift;
}

double DressedSystem::coupling_dipole_au(const RydbergLevel& to, double e_vpm) const {
    const Block& blk = block(m_low_);
    if (e_vpm <= 0.0) return std::abs(blk.z_par0(blk.sb->index_of(g_),
                                                 blk.sb->index_of(to)));
    const auto eig = blk.sb->diagonalize(e_vpm);
    const int a = blk.sb->index_of(g_);
    const int b = blk.sb->index_of(to);
    return std::abs(eig.vectors.col(a).dot(blk.z_sph * eig.vectors.col(b)));
}

namespace {

struct LQ {
    double l, q, w0;
};

LQ lq_of(const std::function<double(double)>& omega_of_e, double ea, double h) {
    double w[5];
    for (int p = 0; p < 5; ++p) w[p] = omega_of_e(ea + (p - 2) * h);
    return {(-w[4] + 8.0 * w[3] - 8.0 * w[1] + w[0]) / (12.0 * h),
            (-w[4] + 16.0 * w[3] - 30.0 * w[2] + 16.0 * w[1] - w[0]) /
                (12.0 * h * h) / 2.0,
            w[2]};
}

} // namespace

CompensationReport DressedSystem::solve_compensation(Mode mode, double ea,
                                                     double fixed_rabi0_hz) const {
    const double h = 0.25;

    auto lq_at = [&](double delta0, double rabi0) -> LQ {
        OperatingPoint op{ea, rabi0, delta0};
        if (mode == Mode::two_level) {
            TwoLevelModel model;
            return lq_of([&](double e) { return model.omega_tilde_hz(*this, e, op); },
                         ea, h);
        }
        const auto ex = transition_expansion(op, h);
        return {ex.linear, ex.quadratic, ex.omega_hz};
    };

    // compensation degenerates as Ea -> 0: nothing to cancel
    {
        const double l_bare = 2.0 *
                              (stark::quadratic_stark_coefficient(e_) -
                               stark::quadratic_stark_coefficient(g_)) *
                              ea;
        if (std::abs(l_bare) < 1.0)
            throw SolverError("solve_compensation: degenerate working point, bare "
                              "linear coefficient " +
                                  std::to_string(l_bare) + " Hz/(V/m) at Ea=" +
                                  std::to_string(ea) + " V/m",
                              "L(Omega=0) ~ 0: nothing to compensate");
    }

    auto rabi_for_l_zero = [&](double delta0) -> double {
        double lo = 1e5, hi = 0.2 * delta0;
        const double l_lo = lq_at(delta0, lo).l;
        double l_hi = lq_at(delta0, hi).l;
        int guard = 0;
        while (l_lo * l_hi > 0.0 && hi < 1.35 * delta0 && guard++ < 24) {
            hi *= 1.3;
            l_hi = lq_at(delta0, hi).l;
        }
        if (l_lo * l_hi > 0.0) return -1.0; // no root at this detuning
        return num::brent_root([&](double r) { return lq_at(delta0, r).l; }, lo, hi,
                               10.0);
    };

    // With the Rabi frequency pinned, the one remaining knob is the detuning:
    // root-solve L(delta0) = 0 and report the expansion there.
    if (fixed_rabi0_hz > 0.0) {
        const double d_lo = 300e6, d_hi = 900e6;
        const int n_scan = 41;
        double prev_d = d_lo, prev_l = lq_at(d_lo, fixed_rabi0_hz).l;
        double root = -1.0;
        for (int k = 1; k < n_scan; ++k) {
            const double d = d_lo + (d_hi - d_lo) * double(k) / (n_scan - 1);
            const double l = lq_at(d, fixed_rabi0_hz).l;
            if (prev_l * l <= 0.0 && std::abs(prev_l) < 1e5 && std::abs(l) < 1e5) {
                root = num::brent_root(
                    [&](double dd) { return lq_at(dd, fixed_rabi0_hz).l; }, prev_d, d,
                    1e3);
                break;
            }
            prev_d = d;
            prev_l = l;
        }
        if (root < 0.0)
            throw SolverError("solve_compensation: no L=0 detuning at the fixed "
                              "Rabi frequency",
                              "scan window 300-900 MHz");
        CompensationReport rep;
        rep.point = OperatingPoint{ea, fixed_rabi0_hz, root};
        const LQ fin = lq_at(root, fixed_rabi0_hz);
        rep.expansion = {fin.w0, fin.l, fin.q};
        fill_dispersion(mode, rep);
        return rep;
    }

    auto q_on_curve = [&](double delta0, double& rabi_out) -> double {
        const double r = rabi_for_l_zero(delta0);
        rabi_out = r;
        if (r < 0.0) return std::nan("");
        return lq_at(delta0, r).q;
    };

    const double d_lo = 300e6, d_hi = 900e6;
    const int n_coarse = (mode == Mode::two_level) ? 61 : 121;
    std::vector<double> ds(n_coarse), qs(n_coarse), rs(n_coarse);
    for (int k = 0; k < n_coarse; ++k) {
        ds[k] = d_lo + (d_hi - d_lo) * double(k) / (n_coarse - 1);
        qs[k] = q_on_curve(ds[k], rs[k]);
    }

    int best = -1;
    for (int k = 0; k < n_coarse; ++k) {
        if (std::isnan(qs[k])) continue;
        if (best < 0 || std::abs(qs[k]) < std::abs(qs[best])) best = k;
    }
    if (best < 0) {
        std::ostringstream trace;
        for (int k = 0; k < n_coarse; ++k)
            trace << ds[k] / 1e6 << " MHz -> no L=0 root\n";
        throw SolverError("solve_compensation: no operating point in the scan window",
                          trace.str());
    }

    double d_best = ds[best], q_best = qs[best], r_best = rs[best];
    double step = (d_hi - d_lo) / (n_coarse - 1);
    for (int pass = 0; pass < 3; ++pass) {
        const int n_fine = 21;
        for (int k = 0; k < n_fine; ++k) {
            const double dd = d_best + step * (double(k) / (n_fine - 1) - 0.5) * 2.0;
            double rr = 0.0;
            const double qq = q_on_curve(dd, rr);
            if (std::isnan(qq)) continue;
            if (std::abs(qq) < std::abs(q_best)) {
                q_best = qq;
                d_best = dd;
                r_best = rr;
            }
        }
        step /= 8.0;
    }

    CompensationReport rep;
    rep.point = OperatingPoint{ea, r_best, d_best};
    const LQ fin = lq_at(d_best, r_best);
    rep.expansion = {fin.w0, fin.l, fin.q};
    fill_dispersion(mode, rep);
    return rep;
}

void DressedSystem::fill_dispersion(Mode mode, CompensationReport& rep) const {
    const double ea = rep.point.field_anchor;
    double wmin = 1e300, wmax = -1e300, w0 = 0.0, dev = 0.0;
    const int n_disp = 21;
    std::vector<double> ws(n_disp);
    for (int k = 0; k < n_disp; ++k) {
        const double e = ea - 1.0 + 2.0 * double(k) / (n_disp - 1);
        ws[k] = (mode == Mode::two_level)
                    ? TwoLevelModel{}.omega_tilde_hz(*this, e, rep.point)
                    : transition_hz(e, rep.point.rabi0_hz, rep.point);
    }
    w0 = (mode == Mode::two_level)
             ? TwoLevelModel{}.omega_tilde_hz(*this, ea, rep.point)
             : transition_hz(ea, rep.point.rabi0_hz, rep.point);
    for (double w : ws) {
        wmin = std::min(wmin, w);
        wmax = std::max(wmax, w);
        dev = std::max(dev, std::abs(w - w0));
    }
    rep.residual_dispersion_hz = wmax - wmin;
    rep.max_deviation_hz = dev;
    rep.detuning_vs_bare_g_hz =
        rep.point.detuning0_hz + bare_level_hz(g_, ea) - block(m_low_).offset0_hz[
            block(m_low_).sb->index_of(g_)];
}

LifetimeBudget DressedSystem::dressed_lifetime(const RydbergLevel& level,
                                               const OperatingPoint& op,
                                               const emission::CavitySpec& cavity) const {
    const double ea = op.field_anchor;
    const double nu0 = drive_frequency_hz(op);
    const int n_ph = 2 * opts_.photon_halfwidth + 1;
    const int center = opts_.photon_halfwidth;

    struct Decomp {
        const Block* blk;
        Eigen::MatrixXd vectors;
        Eigen::VectorXd values;
        std::vector<int> claim;
    };
    auto decompose = [&](int m) {
        Decomp d;
        d.blk = &block(m);
        const Eigen::MatrixXd h = ladder_hamiltonian(*d.blk, ea, op.rabi0_hz, nu0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        d.vectors = es.eigenvectors();
        d.values = es.eigenvalues();
        const int n_at = int(d.blk->levels.size());
        d.claim.assign(n_at, -1);
        for (int a = 0; a < n_at; ++a) {
            const int row = a + n_at * center;
            double best_w = -1.0;
            for (int k = 0; k < d.vectors.cols(); ++k) {
                const double w = d.vectors(row, k) * d.vectors(row, k);
                if (w > best_w) {
                    best_w = w;
                    d.claim[a] = k;
                }
            }
        }
        return d;
    };

    const Decomp init = decompose(level.m);
    const int i_at = int(init.blk->levels.size());
    int init_label = -1;
    for (int a = 0; a < i_at; ++a)
        if (init.blk->levels[a] == level) init_label = a;
    if (init_label < 0)
        throw DomainError("dressed_lifetime: level not in its block");
    const int init_col = init.claim[init_label];
    const double e_init = init.values[init_col];

    std::map<long, double> cav_cache[2];
    auto cavity_factor = [&](int q, double nu) {
        const int par = (q == 0) ? 0 : 1;
        const long key = std::lround(nu / 25e6);
        auto it = cav_cache[par].find(key);
        if (it != cav_cache[par].end()) return it->second;
        emission::CavitySpec cs = cavity;
        cs.lambda = si::c / nu;
        const double f = emission::decay_ratio(
            cs, par ? emission::DipoleOrientation::parallel
                    : emission::DipoleOrientation::perpendicular);
        cav_cache[par][key] = f;
        return f;
    };

    LifetimeBudget out;
    for (int m_to = level.m - 1; m_to <= level.m + 1; ++m_to) {
        if (blocks_.find(m_to) == blocks_.end()) continue;
        const int q = m_to - level.m; // atomic m changes by q
        const Decomp fin = (m_to == level.m) ? init : decompose(m_to);
        const int f_at = int(fin.blk->levels.size());

        Eigen::MatrixXd dip(f_at, i_at);
        for (int b = 0; b < f_at; ++b)
            for (int a = 0; a < i_at; ++a)
                dip(b, a) = hydrogen::dipole_q(fin.blk->levels[b],
                                               init.blk->levels[a], q);

        for (int fl = 0; fl < f_at; ++fl) {
            const int fcol = fin.claim[fl];
            for (int s = -n_ph + 1; s < n_ph; ++s) {
                const double e_fin = fin.values[fcol] + s * nu0;
                const double nu = e_init - e_fin;
                if (nu <= 1.0) continue;
                double d = 0.0;
                for (int j = -center; j <= center; ++j) {
                    const int jp = j - s;
                    if (jp < -center || jp > center) continue;
                    for (int a = 0; a < i_at; ++a) {
                        const double ci = init.vectors(a + i_at * (j + center), init_col);
                        if (std::abs(ci) < 1e-14) continue;
                        for (int b = 0; b < f_at; ++b) {
                            const double cf =
                                fin.vectors(b + f_at * (jp + center), fcol);
                            d += ci * cf * dip(b, a);
                        }
                    }
                }
                if (std::abs(d) < 1e-12) continue;
                const double rate = hydrogen::einstein_a(nu, d) * cavity_factor(q, nu);
                if (rate < 1e-9) continue;
                out.channels.push_back({fin.blk->levels[fl], m_to, s, nu, rate});
                out.total_rate += rate;
            }
        }
    }
    std::sort(out.channels.begin(), out.channels.end(),
              [](const auto& a, const auto& b) { return a.rate > b.rate; });
    out.lifetime_s = out.total_rate > 0.0 ? 1.0 / out.total_rate : 1e300;
    return out;
}

std::vector<ResonanceHit> DressedSystem::sigma_resonance_scan(const OperatingPoint& op,
                                                              double window_hz) const {
    const double ea = op.field_anchor;
    const double nu0 = drive_frequency_hz(op);
    std::vector<ResonanceHit> hits;
    for (const RydbergLevel& from : {g_, e_}) {
        const double e_from = dressed_energy_hz(from, ea, op.rabi0_hz, op);
        for (int m_to : {from.m - 1, from.m + 1}) {
            if (blocks_.find(m_to) == blocks_.end()) continue;
            const auto finals = build_and_diagonalize(m_to, ea, op.rabi0_hz, op);
            for (const auto& f : finals) {
                for (double sgn : {+1.0, -1.0}) {
                    const double det = f.energy_hz - e_from - sgn * nu0;
                    if (std::abs(det) < window_hz)
                        hits.push_back({from, f.label, m_to, det});
                }
            }
        }
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        return std::abs(a.detuning_hz) < std::abs(b.detuning_hz);
    });
    return hits;
}

DressedSurface DressedSurface::fit(const DressedSystem& sys, const OperatingPoint& op,
                                   const std::string& what, double e_half_width,
                                   double rabi_lo_rel, double rabi_hi_rel, int n_e,
                                   int n_w, double tol_hz) {
    DressedSurface out;
    out.kind_ = what;
    out.op_ = op;
    out.e_lo_ = op.field_anchor - e_half_width;
    out.e_hi_ = op.field_anchor + e_half_width;
    out.w_lo_ = rabi_lo_rel;
    out.w_hi_ = rabi_hi_rel;

    const int n_pts = n_e * n_w;
    Eigen::VectorXd val(n_pts), de(n_pts), dw(n_pts);
    std::vector<double> es(n_e), ws(n_w);
    for (int a = 0; a < n_e; ++a)
        es[a] = out.e_lo_ + (out.e_hi_ - out.e_lo_) * a / (n_e - 1);
    for (int b = 0; b < n_w; ++b)
        ws[b] = rabi_lo_rel + (rabi_hi_rel - rabi_lo_rel) * b / (n_w - 1);

    const double anchor = (what == "difference")
                              ? sys.transition_hz(op.field_anchor, op.rabi0_hz, op)
                              : 0.0;

    parallel_for(std::size_t(n_pts), [&](std::size_t idx) {
        const int a = int(idx) / n_w;
        const int b = int(idx) % n_w;
        const double e = es[a];
        const double rabi = op.rabi0_hz * ws[b];
        double v = 0.0;
        if (what == "g")
            v = sys.dressed_energy_hz(sys.level_g(), e, rabi, op);
        else if (what == "e")
            v = sys.dressed_energy_hz(sys.level_e(), e, rabi, op);
        else if (what == "difference")
            v = sys.transition_hz(e, rabi, op) - anchor;
        else
            throw DomainError("DressedSurface: unknown kind '" + what + "'");
        val(long(idx)) = v;
        de(long(idx)) = e - op.field_anchor;
        dw(long(idx)) = ws[b] - 1.0;
    }, default_workers());

    double offset = 0.0;
    if (what != "difference") {
        offset = val.mean();
        val.array() -= offset;
    }

    const int deg = 4;
    Eigen::MatrixXd basis(n_pts, (deg + 1) * (deg + 1));
    for (int p = 0; p < n_pts; ++p) {
        double epow = 1.0;
        int col = 0;
        for (int ii = 0; ii <= deg; ++ii) {
            double wpow = 1.0;
            for (int jj = 0; jj <= deg; ++jj) {
                basis(p, col++) = epow * wpow;
                wpow *= dw(p);
            }
            epow *= de(p);
        }
    }
    Eigen::VectorXd c = basis.colPivHouseholderQr().solve(val);
    out.coef_ = Eigen::MatrixXd::Zero(deg + 1, deg + 1);
    int col = 0;
    for (int ii = 0; ii <= deg; ++ii)
        for (int jj = 0; jj <= deg; ++jj) out.coef_(ii, jj) = c[col++];
    out.coef_(0, 0) += offset;

    out.residual_ = 0.0;
    for (int p = 0; p < n_pts; ++p) {
        const double fitv = out.value_hz(op.field_anchor + de(p),
                                         op.rabi0_hz * (1.0 + dw(p)));
        out.residual_ = std::max(out.residual_, std::abs(fitv - (val(p) + offset)));
    }
    if (out.residual_ > tol_hz)
        throw stark::FitFailure("DressedSurface: residual " +
                                    std::to_string(out.residual_) + " Hz above " +
                                    std::to_string(tol_hz) + " Hz",
                                out.residual_);
    return out;
}

double DressedSurface::value_hz(double e_vpm, double rabi_hz) const {
    const double x = e_vpm - op_.field_anchor;
    const double y = rabi_hz / op_.rabi0_hz - 1.0;
    double acc = 0.0;
    for (int i = int(coef_.rows()) - 1; i >= 0; --i) {
        double row = 0.0;
        for (int j = int(coef_.cols()) - 1; j >= 0; --j) row = row * y + coef_(i, j);
        acc = acc * x + row;
    }
    return acc;
}

double DressedSurface::d_de(double e_vpm, double rabi_hz) const {
    const double x = e_vpm - op_.field_anchor;
    const double y = rabi_hz / op_.rabi0_hz - 1.0;
    double acc = 0.0;
    for (int i = int(coef_.rows()) - 1; i >= 1; --i) {
        double row = 0.0;
        for (int j = int(coef_.cols()) - 1; j >= 0; --j) row = row * y + coef_(i, j);
        acc = acc * x + i * row;
    }
    return acc;
}

double DressedSurface::d_drabi(double e_vpm, double rabi_hz) const {
    const double x = e_vpm - op_.field_anchor;
    const double y = rabi_hz / op_.rabi0_hz - 1.0;
    double acc = 0.0;
    for (int i = int(coef_.rows()) - 1; i >= 0; --i) {
        double row = 0.0;
        for (int j = int(coef_.cols()) - 1; j >= 1; --j) row = row * y + j * coef_(i, j);
        acc = acc * x + row;
    }
    return acc / op_.rabi0_hz;
}

double DressedSurface::energy_j(double e, double rabi) const {
    return si::h * value_hz(e, rabi);
}
double DressedSurface::denergy_dfield(double e, double rabi) const {
    return si::h * d_de(e, rabi);
}
double DressedSurface::denergy_drabi(double e, double rabi) const {
    return si::h * d_drabi(e, rabi);
}
bool DressedSurface::in_range(double e, double rabi) const {
    const double w = rabi / op_.rabi0_hz;
    return e >= e_lo_ && e <= e_hi_ && w >= w_lo_ && w <= w_hi_;
}

void DressedSurface::export_csv(const std::string& path, int n_e, int n_w) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "field_vpm,rabi_hz,value_hz\n";
    f.precision(15);
    for (int a = 0; a < n_e; ++a) {
        const double e = e_lo_ + (e_hi_ - e_lo_) * a / std::max(1, n_e - 1);
        for (int b = 0; b < n_w; ++b) {
            const double w = w_lo_ + (w_hi_ - w_lo_) * b / std::max(1, n_w - 1);
            const double rabi = op_.rabi0_hz * w;
            f << e << ',' << rabi << ',' << value_hz(e, rabi) << '\n';
        }
    }
}

} // namespace ryd::dressing
