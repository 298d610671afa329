#include "ryd/coherence.hpp"

#include <cmath>

#include "ryd/constants.hpp"
#include "ryd/numeric.hpp"
#include "ryd/parallel.hpp"
#include "ryd/rng.hpp"

namespace ryd::coherence {

void RamseyConfig::validate() const {
    drive.validate();
    if (t_max <= 0.0) throw DomainError("RamseyConfig: t_max must be positive");
    if (t_pi && !(*t_pi > 0.0 && *t_pi < t_max))
        throw DomainError("RamseyConfig: echo time must satisfy 0 < t_pi < t_max");
    if (n_out < 2) throw DomainError("RamseyConfig: need at least two output samples");
    if (mode_profile.kind == dynamics::ModeProfile::Kind::sinusoidal_y) {
        if (mode_profile.value(Eigen::Vector3d::Zero()) != 1.0)
            throw DomainError("RamseyConfig: mode profile must be 1 at the origin");
    }
}

double ramsey_phase(const std::vector<double>& t, const std::vector<double>& nu_g_hz,
                    const std::vector<double>& nu_e_hz, double reference_hz) {
    if (t.size() != nu_g_hz.size() || t.size() != nu_e_hz.size() || t.size() < 2)
        throw DomainError("ramsey_phase: mismatched sample series");
    std::vector<double> dnu(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        dnu[i] = nu_e_hz[i] - nu_g_hz[i] - reference_hz;
    return two_pi * num::trapezoid(t, dnu);
}

double contrast_of(const std::vector<double>& phases) {
    if (phases.empty()) return 0.0;
    double c = 0.0, s = 0.0;
    for (double p : phases) {
        c += std::cos(p);
        s += std::sin(p);
    }
    c /= double(phases.size());
    s /= double(phases.size());
    return std::sqrt(c * c + s * s);
}

std::vector<HistogramBin> phase_histogram(const std::vector<double>& phases, int bins) {
    std::vector<HistogramBin> out;
    if (phases.empty() || bins < 1) return out;
    double lo = phases[0], hi = phases[0];
    for (double p : phases) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi <= lo) hi = lo + 1e-9;
    out.resize(bins);
    const double w = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b)
        out[b] = {lo + (b + 0.5) * w, 0, std::abs(lo + (b + 0.5) * w) < pi};
    for (double p : phases) {
        int b = std::min(bins - 1, int((p - lo) / w));
        out[b].count++;
    }
    return out;
}

namespace {

struct PairSeries {
    std::vector<double> t;
    std::vector<double> nu_g, nu_e;      // per-state energies (per-state motion)
    std::vector<double> phase;           // accumulated phase (shared motion)
    std::vector<Eigen::Vector3d> r_g, r_e;
    std::size_t valid_len = 0; // samples before either state leaves validity
};

PairSeries integrate_pair(const RamseyConfig& cfg, const StatePair& states,
                          const Eigen::Vector3d& r0, const Eigen::Vector3d& v0) {
    PairSeries out;
    dynamics::IntegrationOptions opts;
    opts.rel_tol = cfg.rel_tol;
    opts.records_per_period = cfg.records_per_period;
    opts.rabi = dynamics::RabiField{states.rabi0_hz, cfg.mode_profile};

    if (cfg.motion == RamseyConfig::Motion::shared_trajectory) {
        dynamics::AtomSpec atom{si::mass_rb87, states.g, true};
        const double ref = (states.e->energy_j(states.field_anchor_vpm, states.rabi0_hz) -
                            states.g->energy_j(states.field_anchor_vpm, states.rabi0_hz)) /
                           si::h;
        // accumulate the phase with the integrator's own accuracy
        opts.aux = [&states, ref](double, const Eigen::Vector3d&,
                                  const field::FieldSample& s, double rabi) {
            const double rabi_g = states.g->uses_rabi() ? rabi : 0.0;
            const double rabi_e = states.e->uses_rabi() ? rabi : 0.0;
            return two_pi * ((states.e->energy_j(s.modulus, rabi_e) -
                              states.g->energy_j(s.modulus, rabi_g)) /
                                 si::h -
                             ref);
        };
        opts.aux_abs_tol = 1e-7;
        auto obs = [&](const dynamics::TrajectorySample& s) {
            out.phase.push_back(s.aux);
            out.r_g.push_back(s.r);
            out.r_e.push_back(s.r);
            out.t.push_back(s.t);
        };
        dynamics::integrate(atom, cfg.hp, cfg.drive, r0, v0, cfg.t_max, opts, obs,
                            false);
        out.valid_len = out.phase.size();
        return out;
    }

    for (int which = 0; which < 2; ++which) {
        const auto& surf = which == 0 ? states.g : states.e;
        dynamics::AtomSpec atom{si::mass_rb87, surf, true};
        auto& nu = which == 0 ? out.nu_g : out.nu_e;
        auto& rr = which == 0 ? out.r_g : out.r_e;
        std::vector<double>* tgrid = which == 0 ? &out.t : nullptr;
        auto obs = [&](const dynamics::TrajectorySample& s) {
            double rabi = 0.0;
            if (surf->uses_rabi())
                rabi = states.rabi0_hz * cfg.mode_profile.value(s.r) * std::cos(s.tilt_rad);
            nu.push_back(surf->energy_j(s.field_vpm, rabi) / si::h);
            rr.push_back(s.r);
            if (tgrid) tgrid->push_back(s.t);
        };
        dynamics::integrate(atom, cfg.hp, cfg.drive, r0, v0, cfg.t_max, opts, obs,
                            false);
    }
    out.valid_len = std::min(out.nu_g.size(), out.nu_e.size());
    out.t.resize(std::min(out.t.size(), out.valid_len));
    return out;
}

} // namespace

RamseyResult run_ramsey(const RamseyConfig& cfg, const StatePair& states) {
    cfg.validate();
    RamseyResult res;
    res.t.resize(cfg.n_out);
    for (int k = 0; k < cfg.n_out; ++k)
        res.t[k] = cfg.t_max * double(k) / (cfg.n_out - 1);

    const double ref = (states.e->energy_j(states.field_anchor_vpm, states.rabi0_hz) -
                        states.g->energy_j(states.field_anchor_vpm, states.rabi0_hz)) /
                       si::h;

    const int n = cfg.ensemble.count;
    const int n_out = cfg.n_out;
    // per-trajectory phase at each output time; NaN marks invalid horizon
    std::vector<std::vector<double>> phases(n);
    std::vector<double> theta_err(n);
    std::vector<double> mean_sep(n, 0.0), max_sep(n, 0.0);

    parallel_for(std::size_t(n), [&](std::size_t idx) {
        const auto [r0, v0] = cfg.ensemble.draw(int(idx));
        Rng err_rng(cfg.ensemble.seed ^ 0xEC0C0FFEE5ULL, idx);
        theta_err[idx] = cfg.theta_err_sigma * err_rng.gauss();

        auto& ph = phases[idx];
        ph.assign(n_out, std::nan(""));
        if (r0.norm() >= cfg.hp.validity_radius()) return;
        const PairSeries ps = integrate_pair(cfg, states, r0, v0);
        if (ps.valid_len < 2) return;

        // resample the accumulated phase on the output grid; a run that
        // reached t_max may stop a fraction of a recording stride short
        const double stride = ps.t.size() > 1 ? ps.t[1] - ps.t[0] : cfg.t_max;
        const bool completed = ps.t[ps.valid_len - 1] > cfg.t_max - 2.0 * stride;
        const bool shared = cfg.motion == RamseyConfig::Motion::shared_trajectory;
        double acc = 0.0;
        std::size_t i = 1;
        double sep_sum = 0.0;
        for (int k = 0; k < n_out; ++k) {
            const double tk = res.t[k];
            if (tk > ps.t[ps.valid_len - 1] + (completed ? 2.0 * stride : 1e-12)) break;
            while (i < ps.valid_len && ps.t[i] <= tk) {
                if (!shared)
                    acc += 0.5 * two_pi *
                           ((ps.nu_e[i] - ps.nu_g[i] - ref) +
                            (ps.nu_e[i - 1] - ps.nu_g[i - 1] - ref)) *
                           (ps.t[i] - ps.t[i - 1]);
                ++i;
            }
            if (shared) {
                const std::size_t hi = std::min(i, ps.valid_len - 1);
                const std::size_t lo = hi - (hi > 0 ? 1 : 0);
                if (hi > lo && tk >= ps.t[lo] && tk <= ps.t[hi]) {
                    const double w = (tk - ps.t[lo]) / (ps.t[hi] - ps.t[lo]);
                    ph[k] = ps.phase[lo] + w * (ps.phase[hi] - ps.phase[lo]);
                } else {
                    ph[k] = ps.phase[std::min(i - 1, ps.valid_len - 1)];
                }
            } else {
                ph[k] = acc;
            }
        }
        for (std::size_t s = 0; s < ps.valid_len; ++s) {
            const double sep = (ps.r_g[s] - ps.r_e[s]).norm();
            sep_sum += sep;
            max_sep[idx] = std::max(max_sep[idx], sep);
        }
        mean_sep[idx] = sep_sum / double(ps.valid_len);
    }, default_workers());

    // echo bookkeeping: phase at t_pi per trajectory
    std::vector<double> phi_pi(n, std::nan(""));
    int k_pi = -1;
    if (cfg.t_pi) {
        k_pi = int(std::round(*cfg.t_pi / cfg.t_max * (cfg.n_out - 1)));
        for (int j = 0; j < n; ++j) phi_pi[j] = phases[j][k_pi];
    }

    res.contrast.assign(n_out, 0.0);
    res.n_valid.assign(n_out, 0);
    for (int k = 0; k < n_out; ++k) {
        std::complex<double> acc(0.0, 0.0);
        int nv = 0;
        for (int j = 0; j < n; ++j) {
            const double p = phases[j][k];
            if (std::isnan(p)) continue;
            if (k_pi >= 0 && k >= k_pi) {
                if (std::isnan(phi_pi[j])) continue;
                const double half = 0.5 * theta_err[j];
                const double c2 = std::cos(half) * std::cos(half);
                const double s2 = std::sin(half) * std::sin(half);
                acc += c2 * std::exp(std::complex<double>(0.0, p - 2.0 * phi_pi[j])) -
                       s2 * std::exp(std::complex<double>(0.0, p));
            } else {
                acc += std::exp(std::complex<double>(0.0, p));
            }
            ++nv;
        }
        res.n_valid[k] = nv;
        res.contrast[k] = nv > 0 ? std::abs(acc) / double(nv) : 0.0;
    }

    double ms = 0.0, mx = 0.0;
    int n_ok = 0;
    for (int j = 0; j < n; ++j) {
        if (std::isnan(phases[j][0])) continue;
        ms += mean_sep[j];
        mx = std::max(mx, max_sep[j]);
        ++n_ok;
        if (!std::isnan(phases[j][n_out - 1])) res.final_phases.push_back(phases[j][n_out - 1]);
    }
    res.mean_separation_m = n_ok ? ms / n_ok : 0.0;
    res.max_separation_m = mx;
    res.lambda_db_m = si::h / std::sqrt(2.0 * pi * si::mass_rb87 * si::kB *
                                        std::max(cfg.ensemble.temperature_k, 1e-12));
    if (cfg.keep_phases) res.phase_series = std::move(phases);
    return res;
}

SternGerlachReport stern_gerlach_check(const RamseyConfig& cfg, const StatePair& states,
                                       int n_pairs) {
    RamseyConfig small = cfg;
    small.ensemble.count = n_pairs;
    small.motion = RamseyConfig::Motion::per_state;
    const auto res = run_ramsey(small, states);
    SternGerlachReport rep;
    rep.mean_separation_m = res.mean_separation_m;
    rep.max_separation_m = res.max_separation_m;
    rep.lambda_db_m = res.lambda_db_m;
    rep.ok = res.max_separation_m < res.lambda_db_m / 10.0;
    return rep;
}

} // namespace ryd::coherence
