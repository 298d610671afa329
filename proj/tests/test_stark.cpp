#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "ryd/constants.hpp"
#include "ryd/hydrogen.hpp"
#include "ryd/stark.hpp"

using namespace ryd;
namespace hyd = ryd::hydrogen;

namespace {

// Oracle: hydrogenic radial integral by direct Simpson integration of the
// explicit wavefunctions, independent of the closed-form path in rydcore.
double radial_wf(int n, int l, double r) {
    // R_nl(r) = (2/n^2) sqrt((n-l-1)!/(n+l)!) e^{-r/n} (2r/n)^l L^{2l+1}_{n-l-1}(2r/n)
    const double x = 2.0 * r / n;
    const int k = n - l - 1;
    const int a = 2 * l + 1;
    double lag0 = 1.0, lag1 = 1.0 + a - x, lag = (k == 0) ? lag0 : lag1;
    for (int i = 2; i <= k; ++i) {
        lag = ((2.0 * i - 1.0 + a - x) * lag1 - (i - 1.0 + a) * lag0) / i;
        lag0 = lag1;
        lag1 = lag;
    }
    const double lognorm =
        std::log(2.0 / (double(n) * n)) +
        0.5 * (std::lgamma(n - l + 0.0) - std::lgamma(n + l + 1.0));
    if (r <= 0.0) return 0.0;
    const double logpow = l * std::log(x) - r / n;
    return std::exp(lognorm + logpow) * lag;
}

double radial_integral_oracle(int n1, int l1, int n2, int l2) {
    const double rmax = 2.6 * std::max(n1, n2) * std::max(n1, n2);
    const int steps = 20000;
    const double h = rmax / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double r = i * h;
        const double f = radial_wf(n1, l1, r) * r * radial_wf(n2, l2, r) * r * r;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * f;
    }
    return acc * h / 3.0;
}

} // namespace

TEST_CASE("zero-field circular energy is exactly -1/(2 n^2)") {
    const auto g = circular_state(50);
    CHECK(stark::perturbative_energy_au(g, 0.0) == doctest::Approx(-0.5 / 2500.0).epsilon(1e-14));
    CHECK(stark::energy_order1_au(g, 350.0) == 0.0);
}

TEST_CASE("circular quadratic coefficients reproduce the published polarizabilities") {
    const double ag = stark::quadratic_stark_coefficient(circular_state(50));
    const double ae = stark::quadratic_stark_coefficient(circular_state(51));
    CHECK(std::abs(ag - (-203.2)) < 0.1);
    CHECK(std::abs(ae - (-228.7)) < 0.1);
    CHECK(std::abs((ae - ag) - (-25.5)) < 0.1);
}

TEST_CASE("linear Stark slopes") {
    CHECK(stark::linear_stark_slope(circular_state(50)) == 0.0);

    // (50,0,48): slope magnitude (3/2)*1*50 a.u., about 1 MHz/(V/m)
    const double s = stark::linear_stark_slope(RydbergLevel{50, 0, 48});
    const double expected = 1.5 * 50.0 * UnitSystem::slope_au_to_si;
    CHECK(std::abs(s) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(s) == doctest::Approx(0.96e6).epsilon(0.01));

    // manifold antisymmetry: (n, n1, m) vs (n, n-|m|-1-n1, m)
    for (int n1 = 0; n1 <= 4; ++n1) {
        const RydbergLevel a{52, n1, 47};
        const RydbergLevel b{52, 52 - 47 - 1 - n1, 47};
        CHECK(stark::linear_stark_slope(a) ==
              doctest::Approx(-stark::linear_stark_slope(b)).epsilon(1e-12));
    }
}

TEST_CASE("invalid quantum numbers rejected") {
    CHECK_THROWS_AS(stark::perturbative_energy_au(RydbergLevel{50, 0, 50}, 0.0), DomainError);
    CHECK_THROWS_AS(stark::perturbative_energy_au(RydbergLevel{50, 2, 48}, 0.0), DomainError);
    CHECK_THROWS_AS(stark::perturbative_energy_au(circular_state(50), -1.0), DomainError);
}

TEST_CASE("parabolic expansion reproduces the permanent dipoles") {
    for (int n : {50, 51, 53}) {
        const int m = 49;
        if (n - std::abs(m) <= 0) continue;
        const auto pe = hyd::parabolic_expansion(n, m);
        for (int n1 = 0; n1 < pe.basis.size(); ++n1) {
            const int n2 = n - n1 - std::abs(m) - 1;
            CHECK(pe.z_expect[n1] ==
                  doctest::Approx(1.5 * n * (n1 - n2)).epsilon(1e-10));
        }
    }
}

TEST_CASE("radial integrals match the quadrature oracle") {
    // pairs used throughout the stretched-m blocks
    const int cases[][4] = {
        {51, 50, 50, 49}, {52, 50, 50, 49}, {52, 51, 51, 50}, {51, 49, 50, 48},
        {52, 49, 51, 50}, {55, 50, 50, 49}, {53, 52, 52, 51}, {52, 50, 51, 49},
    };
    for (const auto& c : cases) {
        const double got = hyd::radial_integral(c[0], c[1], c[2], c[3]);
        const double want = radial_integral_oracle(c[0], c[1], c[2], c[3]);
        CAPTURE(c[0]); CAPTURE(c[1]); CAPTURE(c[2]); CAPTURE(c[3]);
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
    // same-n closed form
    CHECK(hyd::radial_integral(50, 49, 50, 48) ==
          doctest::Approx(radial_integral_oracle(50, 49, 50, 48)).epsilon(1e-6));
}

TEST_CASE("dipole element ratios match quadrature, symmetry holds") {
    const RydbergLevel g = circular_state(50);
    const RydbergLevel i51{51, 0, 49}, ip51{51, 1, 49};
    const double m_i = hyd::dipole_matrix_element(g, i51, hyd::Polarization::pi);
    const double m_ip = hyd::dipole_matrix_element(g, ip51, hyd::Polarization::pi);
    // both parabolic partners carry the same magnitude (single spherical channel)
    CHECK(std::abs(m_i) == doctest::Approx(std::abs(m_ip)).epsilon(1e-9));
    // the pair exhausts the spherical strength: sum of squares equals
    // |<50,49,49| z |51,50,49>|^2
    const double sph = hyd::radial_integral(51, 50, 50, 49) *
                       hyd::angular_factor(49, 49, 50, 0);
    CHECK(m_i * m_i + m_ip * m_ip == doctest::Approx(sph * sph).epsilon(1e-9));
    // ratio against the oracle route
    const double sph_oracle = radial_integral_oracle(51, 50, 50, 49) *
                              hyd::angular_factor(49, 49, 50, 0);
    CHECK(m_i / sph == doctest::Approx(m_i / sph_oracle).epsilon(1e-6));
    // symmetry
    CHECK(hyd::dipole_matrix_element(i51, g, hyd::Polarization::pi) ==
          doctest::Approx(m_i).epsilon(1e-12));
}

TEST_CASE("selection rules raise domain errors") {
    CHECK_THROWS_AS(hyd::dipole_matrix_element(RydbergLevel{51, 0, 47}, circular_state(50),
                                               hyd::Polarization::pi),
                    DomainError);
    CHECK_THROWS_AS(hyd::dipole_matrix_element(circular_state(51), circular_state(50),
                                               hyd::Polarization::pi),
                    DomainError);
    CHECK_NOTHROW(hyd::dipole_matrix_element(circular_state(51), circular_state(50),
                                             hyd::Polarization::sigma_plus));
}

TEST_CASE("circular-circular sigma dipole gives the 30 ms lifetime") {
    const RydbergLevel e = circular_state(51), g = circular_state(50);
    const double d = hyd::dipole_matrix_element(e, g, hyd::Polarization::sigma_plus);
    const double nu = UnitSystem::au_to_hz(stark::energy_order0_au(e) - stark::energy_order0_au(g));
    const double gamma = hyd::einstein_a(nu, d);
    CHECK(1.0 / gamma == doctest::Approx(30e-3).epsilon(0.10));
}

TEST_CASE("Stark matrix is symmetric with field-independent trace") {
    stark::StarkBlock block(49, 50, 4);
    const auto h0 = block.hamiltonian_au(0.0);
    const auto h1 = block.hamiltonian_au(700.0);
    CHECK((h1 - h1.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h1.trace() == doctest::Approx(h0.trace()).epsilon(1e-14));
}

TEST_CASE("diagonalization: zero-field degeneracies and PT agreement") {
    stark::StarkBlock block(49, 50, 5);

    SUBCASE("zero field reproduces -1/(2n^2) with manifold degeneracy") {
        const auto eig = block.diagonalize(0.0);
        for (int i = 0; i < block.size(); ++i) {
            CHECK(std::abs(eig.energy_hz[i]) < 1.0);
        }
    }

    SUBCASE("circular diagonalized energy vs 2nd-order PT scales as E^4") {
        // The residual is the genuine quartic hyperpolarizability,
        // about -1.9e-7 Hz/(V/m)^4 for the n=50 circular state.
        const int ig = block.index_of(circular_state(50));
        const double d400 = block.diagonalize(400.0).energy_hz[ig] -
                            stark::perturbative_shift_hz(circular_state(50), 400.0);
        CHECK(std::abs(d400) < 10e3);
        CHECK(std::abs(d400) > 1e3);
        const double d200 = block.diagonalize(200.0).energy_hz[ig] -
                            stark::perturbative_shift_hz(circular_state(50), 200.0);
        CHECK(d400 / d200 == doctest::Approx(16.0).epsilon(0.25));
    }

    SUBCASE("adding a manifold moves working-window energies by < 1 Hz after refit") {
        // The extra manifold mostly renormalizes the quadratic coefficient,
        // which the polynomial fit absorbs; what must be converged is the
        // energy variation across the working excursion around 400 V/m.
        stark::StarkBlock bigger(49, 50, 6);
        const int i5 = block.index_of(circular_state(50));
        const int i6 = bigger.index_of(circular_state(50));
        const double d0 = bigger.diagonalize(400.0).energy_hz[i6] -
                          block.diagonalize(400.0).energy_hz[i5];
        for (double e : {398.0, 399.0, 401.0, 402.0}) {
            const double d = bigger.diagonalize(e).energy_hz[i6] -
                             block.diagonalize(e).energy_hz[i5];
            CHECK(std::abs(d - d0) < 1.0);
        }
    }

    SUBCASE("field outside the fitted range is an explicit error") {
        CHECK_THROWS_AS(block.diagonalize(1500.0), stark::OutOfRangeError);
    }
}

TEST_CASE("polynomial fit: coefficients, residual, failure modes") {
    stark::StarkBlock block(49, 50, 5);
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(101, 0.0, stark::kFitFieldMax);
    Eigen::VectorXd grid600 = Eigen::VectorXd::LinSpaced(101, 0.0, 600.0);

    SUBCASE("circular n=50 fit reproduces the polarizability") {
        const auto p = stark::fit_polynomial(block, circular_state(50), grid600);
        CHECK(p.max_residual_hz < 0.5);
        CHECK(std::abs(p.coeffs[2] - (-203.2)) < 0.1);
        CHECK(std::abs(p.coeffs[1]) < 0.1);
        CHECK(std::abs(p.shift_hz(400.0) -
                       block.diagonalize(400.0).energy_hz[block.index_of(circular_state(50))]) < 0.5);
        CHECK_THROWS_AS(p.shift_hz(1200.0), stark::OutOfRangeError);
    }

    SUBCASE("over the full kV/m range the hydrogen E^6 content exceeds the 0.5 Hz budget") {
        // Quartic fits cannot do better than a few Hz over [0,1000] V/m;
        // the error object carries the achieved residual.
        try {
            (void)stark::fit_polynomial(block, circular_state(50), grid);
            FAIL("expected FitFailure");
        } catch (const stark::FitFailure& e) {
            CHECK(e.residual_hz > 0.5);
            CHECK(e.residual_hz < 12.0);
        }
    }

    SUBCASE("constant synthetic level fits to all-zero coefficients") {
        const auto p = stark::fit_polynomial_data(circular_state(50), grid,
                                                  Eigen::VectorXd::Zero(grid.size()), 4, 0.5);
        for (int k = 0; k < p.coeffs.size(); ++k)
            CHECK(std::abs(p.coeffs[k]) < 1e-12);
    }

    SUBCASE("2nd-order fit residual is at least 10x worse for a linear-manifold level") {
        const RydbergLevel lv{51, 0, 49};
        const auto p4 = stark::fit_polynomial(block, lv, grid, 4, 1e9);
        const auto p2 = stark::fit_polynomial(block, lv, grid, 2, 1e9);
        CHECK(p2.max_residual_hz > 10.0 * p4.max_residual_hz);
        // near the working field the quartic is comfortably inside 0.5 Hz
        Eigen::VectorXd gw = Eigen::VectorXd::LinSpaced(81, 300.0, 500.0);
        const auto pw = stark::fit_polynomial(block, lv, gw, 4, 0.5);
        CHECK(pw.max_residual_hz < 0.5);
    }

    SUBCASE("fit failure carries the residual") {
        const RydbergLevel lv{51, 0, 49};
        try {
            (void)stark::fit_polynomial(block, lv, grid, 1, 0.5);
            FAIL("expected FitFailure");
        } catch (const stark::FitFailure& e) {
            CHECK(e.residual_hz > 0.5);
        }
    }

    SUBCASE("needs at least 50 grid points") {
        Eigen::VectorXd tiny = Eigen::VectorXd::LinSpaced(10, 0.0, 1000.0);
        CHECK_THROWS_AS(stark::fit_polynomial(block, circular_state(50), tiny), DomainError);
    }
}

TEST_CASE("polynomial CSV round trip") {
    stark::StarkBlock block(49, 50, 5);
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(60, 0.0, 600.0);
    std::vector<stark::StarkPolynomial> polys{
        stark::fit_polynomial(block, circular_state(50), grid),
        stark::fit_polynomial(block, RydbergLevel{51, 1, 49}, grid, 4, 2.0),
    };
    const std::string path = "stark_polys_test.csv";
    stark::save_polynomials_csv(path, polys);
    const auto back = stark::load_polynomials_csv(path);
    REQUIRE(back.size() == polys.size());
    for (std::size_t i = 0; i < polys.size(); ++i) {
        CHECK(back[i].level == polys[i].level);
        CHECK(back[i].coeffs.isApprox(polys[i].coeffs));
        CHECK(back[i].e_max == polys[i].e_max);
    }
    std::remove(path.c_str());
}
