#include "ryd/dynamics.hpp"

#include <cmath>

#include "ryd/constants.hpp"
#include "ryd/numeric.hpp"
#include "ryd/parallel.hpp"

namespace ryd::dynamics {

PolynomialSurface::PolynomialSurface(Eigen::VectorXd coeffs_hz, double e_min, double e_max)
    : c_(std::move(coeffs_hz)), e_min_(e_min), e_max_(e_max) {
    dc_ = num::polyder(c_);
}

double PolynomialSurface::energy_j(double e, double) const {
    return si::h * num::polyval(c_, e);
}
double PolynomialSurface::denergy_dfield(double e, double) const {
    return si::h * num::polyval(dc_, e);
}

double ModeProfile::value(const Eigen::Vector3d& r) const {
    if (kind == Kind::uniform) return 1.0;
    return std::cos(0.5 * pi * r.y() / y_node);
}

Eigen::Vector3d ModeProfile::gradient(const Eigen::Vector3d& r) const {
    if (kind == Kind::uniform) return Eigen::Vector3d::Zero();
    const double k = 0.5 * pi / y_node;
    return Eigen::Vector3d(0.0, -k * std::sin(k * r.y()), 0.0);
}

Trajectory integrate(const AtomSpec& atom, const field::HarmonicPotential& hp,
                     const field::DriveSettings& drive, const Eigen::Vector3d& r0,
                     const Eigen::Vector3d& v0, double t_end,
                     const IntegrationOptions& opts, const SampleObserver& observer,
                     bool keep_samples) {
    drive.validate();
    hp.require_inside(r0);
    if (atom.surface->uses_rabi() && !opts.rabi)
        throw DomainError("integrate: surface needs a Rabi field configuration");

    Trajectory traj;
    const double validity = hp.validity_radius();
    const double g = atom.gravity ? si::g_earth : 0.0;
    const double inv_m = 1.0 / atom.mass_kg;
    const bool with_aux = bool(opts.aux);

    auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        const Eigen::Vector3d r = y.head<3>();
        const Eigen::Vector3d v = y.segment<3>(3);
        // freeze the force on the sphere boundary; the stop event ends the run
        const Eigen::Vector3d rc = (r.norm() < validity) ? r : r * (0.999 * validity / r.norm());
        const auto s = field::field(hp, drive, rc, t);

        double rabi = 0.0;
        Eigen::Vector3d force = Eigen::Vector3d::Zero();
        if (atom.surface->uses_rabi()) {
            const double f = opts.rabi->profile.value(rc);
            const double ct = std::cos(s.tilt);
            rabi = opts.rabi->omega0_hz * f * ct;
            if (opts.rabi->gradient_force) {
                // grad(Omega) = Omega0 [grad(f) cos(theta) + f grad(cos theta)]
                const double ez_abs = std::abs(s.evec.z());
                Eigen::Vector3d grad_ct = Eigen::Vector3d::Zero();
                if (s.modulus > 0.0 && ez_abs > 0.0) {
                    const double sgn = s.evec.z() >= 0.0 ? 1.0 : -1.0;
                    grad_ct = sgn * s.jacobian.col(2) / s.modulus -
                              ez_abs * s.grad_modulus / (s.modulus * s.modulus);
                }
                const Eigen::Vector3d grad_rabi =
                    opts.rabi->omega0_hz *
                    (opts.rabi->profile.gradient(rc) * ct + f * grad_ct);
                force -= atom.surface->denergy_drabi(s.modulus, rabi) * grad_rabi;
            }
        }
        force -= atom.surface->denergy_dfield(s.modulus, rabi) * s.grad_modulus;
        force.z() -= atom.mass_kg * g;

        dydt.head<3>() = v;
        dydt.segment<3>(3) = force * inv_m;
        if (with_aux) {
            if (!atom.surface->uses_rabi() && opts.rabi)
                rabi = opts.rabi->omega0_hz * opts.rabi->profile.value(rc) *
                       std::cos(s.tilt);
            dydt[6] = opts.aux(t, rc, s, rabi);
        }
    };

    const double period = two_pi / drive.omega;
    const double record_dt = period / opts.records_per_period;

    Eigen::Vector3d prev_dir = Eigen::Vector3d::Zero();
    double prev_t = 0.0;
    bool have_prev = false;
    Eigen::Vector3d r_sum = Eigen::Vector3d::Zero();
    std::size_t n_rec = 0;
    std::vector<Eigen::Vector3d> positions;

    auto observe = [&](double t, const Eigen::VectorXd& y) {
        TrajectorySample smp;
        smp.t = t;
        smp.r = y.head<3>();
        smp.v = y.segment<3>(3);
        if (with_aux) smp.aux = y[6];
        const Eigen::Vector3d rc =
            (smp.r.norm() < validity) ? smp.r : smp.r * (0.999 * validity / smp.r.norm());
        const auto s = field::field(hp, drive, rc, t);
        smp.field_vpm = s.modulus;
        smp.tilt_rad = s.tilt;
        if (atom.surface->uses_rabi() &&
            !atom.surface->in_range(s.modulus, opts.rabi->omega0_hz *
                                                   opts.rabi->profile.value(rc) *
                                                   std::cos(s.tilt)))
            traj.surface_in_range = false;
        if (!atom.surface->uses_rabi() && !atom.surface->in_range(s.modulus, 0.0))
            traj.surface_in_range = false;

        if (s.modulus > 0.0) {
            const Eigen::Vector3d dir = s.evec / s.modulus;
            if (have_prev && t > prev_t) {
                const double rate = (dir - prev_dir).norm() / (t - prev_t);
                traj.max_direction_rate = std::max(traj.max_direction_rate, rate);
            }
            prev_dir = dir;
            prev_t = t;
            have_prev = true;
        }
        r_sum += smp.r;
        ++n_rec;
        positions.push_back(smp.r);
        if (observer) observer(smp);
        if (keep_samples) traj.samples.push_back(smp);
    };

    auto stop = [&](double, const Eigen::VectorXd& y) {
        return y.head<3>().norm() >= validity;
    };

    Eigen::VectorXd y(with_aux ? 7 : 6);
    y.setZero();
    y.head<3>() = r0;
    y.segment<3>(3) = v0;
    Eigen::VectorXd abs_tols;
    if (with_aux) {
        abs_tols = Eigen::VectorXd::Constant(7, opts.abs_tol_pos);
        abs_tols[6] = opts.aux_abs_tol;
    }
    const auto res = num::integrate_rk45(rhs, y, 0.0, t_end, record_dt, observe, stop,
                                         opts.rel_tol, opts.abs_tol_pos,
                                         with_aux ? &abs_tols : nullptr);
    if (res.stopped) {
        traj.trapped = false;
        traj.exit_time = res.stop_time;
    }
    if (n_rec > 1) {
        const Eigen::Vector3d mean = r_sum / double(n_rec);
        for (const auto& p : positions)
            traj.extension_m = std::max(traj.extension_m, (p - mean).norm());
    }
    return traj;
}

Eigen::Vector3d mathieu_q(const field::DriveSettings& drive,
                          const field::HarmonicPotential& hp, double alpha_j,
                          double mass_kg) {
    const double z0 = hp.z0();
    const double qx = alpha_j * (3.0 * std::sqrt(21.0) / pi) * drive.u1 * drive.u30 *
                      hp.v(1, 1) * hp.v(3, 3) /
                      (mass_kg * drive.omega * drive.omega * z0 * z0 * z0 * z0);
    return Eigen::Vector3d(qx, qx, -2.0 * qx);
}

bool stability_classify(const Eigen::Vector3d& q) {
    return q.cwiseAbs().maxCoeff() <= 0.907;
}

double mathieu_threshold_omega(const field::DriveSettings& drive,
                               const field::HarmonicPotential& hp, double alpha_j,
                               double mass_kg, double q_crit) {
    const auto q1 = mathieu_q(drive, hp, alpha_j, mass_kg); // at drive.omega
    const double qz_w2 = std::abs(q1.z()) * drive.omega * drive.omega; // |q_z| * w^2
    return std::sqrt(qz_w2 / q_crit);
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> InitialEnsemble::draw(int index) const {
    Rng rng(seed, std::uint64_t(index));
    const double scale = std::sqrt(temperature_k / 300e-9);
    const double sv = sigma_v_ref * scale;
    const double sr = sigma_r_ref * scale;
    Eigen::Vector3d r, v;
    for (int i = 0; i < 3; ++i) r[i] = sr * rng.gauss();
    for (int i = 0; i < 3; ++i) v[i] = sv * rng.gauss();
    v.y() += recoil_v_y;
    return {r, v};
}

EnsembleResult trapping_efficiency(const AtomSpec& atom,
                                   const field::HarmonicPotential& hp,
                                   const field::DriveSettings& drive,
                                   const InitialEnsemble& ensemble, double t_hold,
                                   const IntegrationOptions& opts) {
    EnsembleResult out;
    const int n = ensemble.count;
    out.trapped.assign(n, 0);
    std::vector<double> th_mean(n, 0.0), th2_mean(n, 0.0);

    parallel_for(n, [&](std::size_t i) {
        const auto [r0, v0] = ensemble.draw(int(i));
        double sum_th = 0.0, sum_th2 = 0.0;
        std::size_t cnt = 0;
        auto obs = [&](const TrajectorySample& s) {
            sum_th += s.tilt_rad;
            sum_th2 += s.tilt_rad * s.tilt_rad;
            ++cnt;
        };
        Trajectory tr;
        if (r0.norm() >= hp.validity_radius()) {
            tr.trapped = false;
            tr.exit_time = 0.0;
        } else {
            tr = integrate(atom, hp, drive, r0, v0, t_hold, opts, obs, false);
        }
        out.trapped[i] = tr.trapped ? 1 : 0;
        if (cnt > 0) {
            th_mean[i] = sum_th / double(cnt);
            th2_mean[i] = sum_th2 / double(cnt);
        }
    }, default_workers());

    int n_trapped = 0;
    double th = 0.0, th2 = 0.0;
    for (int i = 0; i < n; ++i) {
        n_trapped += out.trapped[i];
        th += th_mean[i];
        th2 += th2_mean[i];
    }
    out.efficiency = double(n_trapped) / double(n);
    out.mean_theta = th / double(n);
    out.mean_theta_sq = th2 / double(n);
    return out;
}

double trap_depth(const AtomSpec& atom, const field::HarmonicPotential& hp,
                  const field::DriveSettings& drive, const InitialEnsemble& ensemble,
                  double t_lo, double t_hi, const IntegrationOptions& opts) {
    auto eff_at = [&](double t0) {
        InitialEnsemble e = ensemble;
        e.temperature_k = t0;
        return trapping_efficiency(atom, hp, drive, e, 1.0, opts).efficiency;
    };
    double f_lo = eff_at(t_lo);
    double f_hi = eff_at(t_hi);
    // expand the bracket a few times if needed
    for (int k = 0; k < 4 && f_lo < 0.5; ++k) { t_lo /= 4.0; f_lo = eff_at(t_lo); }
    for (int k = 0; k < 4 && f_hi > 0.5; ++k) { t_hi *= 4.0; f_hi = eff_at(t_hi); }
    if (f_lo < 0.5 || f_hi > 0.5)
        throw BracketError("trap_depth: efficiency does not bracket 0.5", f_lo, f_hi);
    for (int it = 0; it < 60; ++it) {
        if (t_hi - t_lo <= 0.1 * 0.5 * (t_hi + t_lo)) break;
        const double mid = std::sqrt(t_lo * t_hi);
        if (eff_at(mid) >= 0.5) t_lo = mid; else t_hi = mid;
    }
    return std::sqrt(t_lo * t_hi);
}

MacromotionFrequencies macromotion_frequencies(const Trajectory& traj,
                                               double drive_omega) {
    if (traj.samples.size() < 64)
        throw AnalysisError("macromotion_frequencies: trajectory too short");
    const double dt = traj.samples[1].t - traj.samples[0].t;
    std::vector<double> xs(traj.samples.size()), zs(traj.samples.size());
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        xs[i] = traj.samples[i].r.x();
        zs[i] = traj.samples[i].r.z();
    }
    const double span = double(traj.samples.size()) * dt;
    const double f_lo = 2.0 / span; // skip the DC ridge
    const double f_hi = drive_omega / two_pi / 2.0;
    const auto px = num::dominant_peak(xs, dt, f_lo, f_hi);
    const auto pz = num::dominant_peak(zs, dt, f_lo, f_hi);
    if (!px.found || !pz.found)
        throw AnalysisError("macromotion_frequencies: no spectral peak below half the drive");
    return {px.frequency, pz.frequency};
}

TiltStatistics tilt_statistics(const std::vector<Trajectory>& trajectories) {
    TiltStatistics out;
    if (trajectories.empty()) return out;
    double th = 0.0, th2 = 0.0;
    for (const auto& tr : trajectories) {
        double s = 0.0, s2 = 0.0;
        for (const auto& smp : tr.samples) {
            s += smp.tilt_rad;
            s2 += smp.tilt_rad * smp.tilt_rad;
        }
        const double n = std::max<std::size_t>(1, tr.samples.size());
        th += s / n;
        th2 += s2 / n;
    }
    out.mean_theta = th / trajectories.size();
    out.mean_theta_sq = th2 / trajectories.size();
    return out;
}

} // namespace ryd::dynamics
