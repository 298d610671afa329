#include "doctest.h"

#include <cmath>

#include "ryd/coherence.hpp"
#include "ryd/constants.hpp"
#include "ryd/field.hpp"
#include "ryd/dressing.hpp"
#include "ryd/presets.hpp"
#include "ryd/rng.hpp"
#include "ryd/stark.hpp"

using namespace ryd;
using namespace ryd::coherence;
using namespace ryd::dressing;

namespace {

struct Shared {
    DressedSystem sys{49};
    OperatingPoint op{400.0, 200.0e6, 555.916e6};
    StatePair states;
    presets::TrapPreset trap = presets::trap_preset("trapA");
    Shared() {
        states.g = std::make_shared<DressedSurface>(DressedSurface::fit(sys, op, "g"));
        states.e = std::make_shared<DressedSurface>(DressedSurface::fit(sys, op, "e"));
        states.rabi0_hz = op.rabi0_hz;
        states.field_anchor_vpm = 400.0;
    }
};

Shared& shared() {
    static Shared s;
    return s;
}

RamseyConfig base_config(int count, double t_max) {
    RamseyConfig cfg;
    cfg.hp = shared().trap.potential;
    cfg.drive = shared().trap.drive;
    cfg.mode_profile.kind = dynamics::ModeProfile::Kind::uniform;
    cfg.ensemble.count = count;
    cfg.ensemble.temperature_k = 300e-9;
    cfg.ensemble.seed = 21;
    cfg.t_max = t_max;
    cfg.n_out = 51;
    return cfg;
}

} // namespace

TEST_CASE("contrast estimator") {
    CHECK(contrast_of({0.3, 0.3, 0.3, 0.3}) == doctest::Approx(1.0));
    CHECK(contrast_of({}) == 0.0);

    SUBCASE("uniform random phases over [0, 2pi) average to below 0.03") {
        Rng rng(5, 1);
        std::vector<double> ph(10000);
        for (auto& p : ph) p = two_pi * rng.uniform();
        CHECK(contrast_of(ph) < 0.03);
    }

    SUBCASE("invariant under a global phase offset") {
        Rng rng(5, 2);
        std::vector<double> ph(500), shifted(500);
        for (int i = 0; i < 500; ++i) {
            ph[i] = 2.0 * rng.gauss();
            shifted[i] = ph[i] + 1.234;
        }
        CHECK(contrast_of(shifted) == doctest::Approx(contrast_of(ph)).epsilon(1e-12));
    }
}

TEST_CASE("phase histogram splits small and large phases") {
    std::vector<double> ph{0.1, -0.2, 0.3, 6.0, -7.0, 0.05};
    const auto hist = phase_histogram(ph, 5);
    REQUIRE(hist.size() == 5);
    int total = 0;
    for (const auto& b : hist) total += b.count;
    CHECK(total == int(ph.size()));
    CHECK(hist.front().small_phase == (std::abs(hist.front().center) < pi));
}

TEST_CASE("ramsey phase quadrature") {
    SUBCASE("constant detuning integrates exactly") {
        std::vector<double> t{0.0, 0.1, 0.2, 0.3};
        std::vector<double> g{0, 0, 0, 0}, e{2.5, 2.5, 2.5, 2.5};
        CHECK(ramsey_phase(t, g, e, 0.0) == doctest::Approx(two_pi * 2.5 * 0.3));
        CHECK(ramsey_phase(t, g, e, 2.5) == doctest::Approx(0.0));
    }
    SUBCASE("mismatched series rejected") {
        CHECK_THROWS_AS(ramsey_phase({0, 1}, {0}, {0, 0}, 0.0), DomainError);
    }
}

TEST_CASE("static atom at the anchor accumulates no phase") {
    auto& sh = shared();
    // resting atom in a pure bias field tuned to exactly the anchor field:
    // E stays at Ea and theta at zero while the atom slowly falls through
    // the uniform-field region, so the coherence stays on resonance
    RamseyConfig cfg = base_config(1, 5e-3);
    cfg.ensemble.temperature_k = 0.0;
    cfg.ensemble.recoil_v_y = 0.0;
    cfg.drive.u2 = 0.0;
    cfg.drive.u30 = 0.0;
    const double e_per_volt =
        field::field(cfg.hp, field::DriveSettings{1.0, 0, 0, cfg.drive.omega},
                     Eigen::Vector3d::Zero(), 0.0)
            .modulus;
    cfg.drive.u1 = 400.0 / e_per_volt;
    const auto res = run_ramsey(cfg, sh.states);
    REQUIRE(res.n_valid.back() == 1);
    CHECK(std::abs(res.final_phases.front()) < 1e-5);
}

TEST_CASE("quadrature self-convergence: doubling the sampling rate") {
    auto& sh = shared();
    // single trajectory over a horizon short enough that the driven orbit is
    // still deterministic (sensitivity to the step sequence grows
    // exponentially at longer times, even at converged tolerances)
    RamseyConfig cfg = base_config(1, 0.05);
    cfg.ensemble.seed = 77;
    cfg.records_per_period = 20;
    const auto r1 = run_ramsey(cfg, sh.states);
    cfg.records_per_period = 40;
    const auto r2 = run_ramsey(cfg, sh.states);
    REQUIRE(!r1.final_phases.empty());
    REQUIRE(!r2.final_phases.empty());
    CHECK(std::abs(r1.final_phases[0] - r2.final_phases[0]) < 1e-3);

    SUBCASE("ensemble contrast is sampling-rate stable at longer times") {
        RamseyConfig ens = base_config(60, 0.1);
        ens.n_out = 11;
        ens.records_per_period = 20;
        const auto c1 = run_ramsey(ens, sh.states);
        ens.records_per_period = 40;
        const auto c2 = run_ramsey(ens, sh.states);
        CHECK(std::abs(c1.contrast.back() - c2.contrast.back()) < 0.08);
    }
}

TEST_CASE("phase evolution is quasi-linear over trap periods") {
    auto& sh = shared();
    RamseyConfig cfg = base_config(1, 0.04);
    cfg.ensemble.seed = 3;
    cfg.n_out = 41;
    cfg.keep_phases = true;
    const auto res = run_ramsey(cfg, sh.states);
    REQUIRE(res.n_valid.back() == 1);
    const auto& ph = res.phase_series.front();
    REQUIRE(int(ph.size()) == cfg.n_out);
    // least-squares line through phi(t); residuals stay a small fraction of
    // the total drift (the drift itself steps at the trap period)
    double st = 0, sp = 0, stt = 0, stp = 0;
    for (int k = 0; k < cfg.n_out; ++k) {
        st += res.t[k];
        sp += ph[k];
        stt += res.t[k] * res.t[k];
        stp += res.t[k] * ph[k];
    }
    const int n = cfg.n_out;
    const double slope = (n * stp - st * sp) / (n * stt - st * st);
    const double icpt = (sp - slope * st) / n;
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(ph[k] - (icpt + slope * res.t[k])));
    const double total = std::abs(ph[n - 1] - ph[0]);
    CHECK(total > 0.0);
    CHECK(worst < 0.35 * total);
}

TEST_CASE("dephasing without dressing is orders of magnitude faster") {
    auto& sh = shared();
    // bare quadratic surfaces for g and e
    const double ag = stark::quadratic_stark_coefficient(circular_state(50)) * si::h;
    const double ae = stark::quadratic_stark_coefficient(circular_state(51)) * si::h;
    StatePair bare;
    bare.g = std::make_shared<dynamics::QuadraticSurface>(ag);
    bare.e = std::make_shared<dynamics::QuadraticSurface>(ae);
    bare.rabi0_hz = 0.0;
    bare.field_anchor_vpm = 400.0;
    // the 20 kHz/(V/m-excursion) bare broadening dephases within a few ms
    // once the atoms explore their orbits, versus tens of ms when dressed
    RamseyConfig cfg = base_config(60, 5e-3);
    cfg.n_out = 11;
    cfg.records_per_period = 200; // resolve the fast bare phase drift
    const auto res = run_ramsey(cfg, bare);
    const auto dressed = run_ramsey(cfg, sh.states);
    CHECK(res.contrast.back() < 0.5);
    CHECK(dressed.contrast.back() > res.contrast.back() + 0.3);
}

TEST_CASE("echo identity: linear drift rephases exactly at 2 t_pi") {
    // synthetic check of the echo transformation on ideal linear phases
    const int n = 1000;
    Rng rng(9, 0);
    std::vector<double> rates(n);
    for (auto& r : rates) r = 30.0 * rng.gauss();
    auto c_at = [&](double t, double t_pi, double sigma_theta) {
        std::complex<double> acc(0, 0);
        Rng trng(10, 0);
        for (int j = 0; j < n; ++j) {
            const double phi_t = rates[j] * t;
            const double phi_pi = rates[j] * t_pi;
            const double th = sigma_theta * trng.gauss();
            const double c2 = std::cos(th / 2) * std::cos(th / 2);
            const double s2 = std::sin(th / 2) * std::sin(th / 2);
            acc += c2 * std::exp(std::complex<double>(0, phi_t - 2 * phi_pi)) -
                   s2 * std::exp(std::complex<double>(0, phi_t));
        }
        return std::abs(acc) / double(n);
    };
    CHECK(c_at(1.0, 0.5, 0.0) == doctest::Approx(1.0));
    // imperfect pulses cost only the sin^2 fraction
    CHECK(c_at(1.0, 0.5, 0.1) > 0.99);
    // without echo the same ensemble is fully dephased at 1 s
    std::vector<double> phases(n);
    for (int j = 0; j < n; ++j) phases[j] = rates[j] * 1.0;
    CHECK(contrast_of(phases) < 0.1);
}

TEST_CASE("trap A contrast decay and echo revival (reduced ensemble)") {
    auto& sh = shared();
    RamseyConfig cfg = base_config(150, 1.0);
    cfg.t_pi = 0.5;
    cfg.n_out = 101;
    const auto res = run_ramsey(cfg, sh.states);
    REQUIRE(res.n_valid.back() > 140);

    // fast initial fall, slow tail, strong revival at 2 t_pi
    double t50 = -1.0;
    for (int k = 1; k < cfg.n_out; ++k)
        if (res.contrast[k] < 0.5) {
            t50 = res.t[k];
            break;
        }
    CHECK(t50 > 5e-3);
    CHECK(t50 < 80e-3);
    CHECK(res.contrast[50] < 0.25);       // T = 0.5 s, pre-revival
    CHECK(res.contrast[100] > 0.75);      // T = 1 s revival
    // non-exponential: the late-time slope is much shallower than the start
    const double early = res.contrast[2] / res.contrast[4];
    const double late = res.contrast[30] / res.contrast[40];
    CHECK(early > late * 0.8);
}

TEST_CASE("Stern-Gerlach separation diagnostics") {
    auto& sh = shared();
    RamseyConfig cfg = base_config(6, 0.25);
    const auto rep = stern_gerlach_check(cfg, sh.states, 6);
    CHECK(rep.lambda_db_m == doctest::Approx(0.34e-6).epsilon(0.03));
    CHECK(rep.mean_separation_m > 0.0);

    SUBCASE("identical surfaces give zero separation") {
        StatePair same = sh.states;
        same.e = same.g;
        const auto rep0 = stern_gerlach_check(cfg, same, 4);
        CHECK(rep0.max_separation_m == 0.0);
    }

    SUBCASE("bare surfaces separate much faster than dressed ones") {
        const double ag = stark::quadratic_stark_coefficient(circular_state(50)) * si::h;
        const double ae = stark::quadratic_stark_coefficient(circular_state(51)) * si::h;
        StatePair bare;
        bare.g = std::make_shared<dynamics::QuadraticSurface>(ag);
        bare.e = std::make_shared<dynamics::QuadraticSurface>(ae);
        bare.rabi0_hz = 0.0;
        bare.field_anchor_vpm = 400.0;
        const auto repb = stern_gerlach_check(cfg, bare, 6);
        CHECK(repb.max_separation_m > rep.max_separation_m);
        CHECK(repb.max_separation_m > repb.lambda_db_m);
        CHECK_FALSE(repb.ok);
    }
}

TEST_CASE("configuration validation") {
    auto& sh = shared();
    RamseyConfig cfg = base_config(1, 0.1);
    cfg.t_pi = 0.2;
    CHECK_THROWS_AS(run_ramsey(cfg, sh.states), DomainError);
    cfg.t_pi.reset();
    cfg.n_out = 1;
    CHECK_THROWS_AS(run_ramsey(cfg, sh.states), DomainError);
}
