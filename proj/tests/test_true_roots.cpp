#include <doctest.h>

#include <cmath>
#include <complex>

#include "renewal/continuation.hpp"
#include "renewal/spectral.hpp"
#include "renewal/system.hpp"

using namespace renewal;
using Complex = std::complex<double>;

namespace {

// rightmost root of the true characteristic function of a model linearized
// at its equilibrium, tracked by complex Newton from the discrete spectrum
Complex true_rightmost(const RenewalModel& model, double b_guess, int seed_M = 30) {
    const double b = solve_equilibrium(model, b_guess);
    const CharFn chi = char_true(linearize_at(model, b));
    const ChebyshevMesh mesh = build_mesh(seed_M, model.tau);
    const Spectrum spec =
        eigenvalues(build_system(mesh, model), equilibrium_lift(b, mesh));
    std::vector<Complex> seeds(spec.eigenvalues.begin(), spec.eigenvalues.begin() + 4);
    const RootSearch search = find_char_roots(chi, seeds, 1e-13);
    REQUIRE_FALSE(search.roots.empty());
    Complex best = search.roots.front();
    for (const Complex& root : search.roots)
        if (root.real() > best.real()) best = root;
    return best;
}

}  // namespace

TEST_CASE("cannibalism Hopf point hits its closed form 1 + pi/2") {
    // for tau = 3 the linearized kernel is (1 - log gamma)/2 on [1, 3]; at
    // lambda = i pi/2 the characteristic equation collapses to
    // log gamma = 1 + pi/2, an exact Hopf location for the renewal equation
    const double exact = 1.0 + std::acos(-1.0) / 2.0;

    SUBCASE("true characteristic root crosses the axis there") {
        const Complex at_exact =
            true_rightmost(cannibalism_model(std::exp(exact), 3.0), 2.5);
        CHECK(std::abs(at_exact.real()) <= 1e-12);
        CHECK(at_exact.imag() ==
              doctest::Approx(std::acos(-1.0) / 2.0).epsilon(1e-12));
    }

    SUBCASE("the refined discrete Hopf agrees to spectral accuracy at M=20") {
        const ModelFamily family =
            make_family("cannibalism", {{"tau", 3.0}}, "log_gamma", 2.0, 3.0);
        const ChebyshevMesh mesh = build_mesh(20, 3.0);
        const Branch branch = continue_equilibria(family, mesh, 2.0, 11);
        const auto bifs = detect_bifurcations(branch, family, mesh, 0, 1e-10);
        REQUIRE(bifs.size() == 1);
        CHECK(std::abs(bifs[0].param - exact) <= 1e-6);
    }
}

TEST_CASE("sirs Hopf from the true characteristic function validates the branch") {
    // bisection in log gamma on the real part of the rightmost true root
    auto re_true = [&](double lg) {
        return true_rightmost(sirs_model(std::exp(lg)), 0.7).real();
    };
    double lo = 1.4, hi = 1.9;
    REQUIRE(re_true(lo) < 0.0);
    REQUIRE(re_true(hi) > 0.0);
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (re_true(mid) < 0.0 ? lo : hi) = mid;
    }
    const double hopf_true = 0.5 * (lo + hi);
    CHECK(std::abs(hopf_true - 1.6553) <= 5e-3);

    const ModelFamily family = make_family("sirs", {}, "log_gamma", 1.2, 2.0);
    const ChebyshevMesh mesh = build_mesh(20, 1.0);
    const Branch branch = continue_equilibria(family, mesh, 1.0 - std::exp(-1.2), 17);
    const auto bifs = detect_bifurcations(branch, family, mesh, 0, 1e-10);
    REQUIRE(bifs.size() == 1);
    CHECK(std::abs(bifs[0].param - hopf_true) <= 1e-5);
}

TEST_CASE("blowflies Hopf frequency solves the delay phase condition") {
    // for the underlying delayed feedback with decay mu, the crossing
    // frequency satisfies tan(omega) = -omega / mu; check the discrete
    // crossing pair against that transcendental at mu = 4
    const double mu = 4.0, c = 100.0, tau = 10.0;
    auto family_at = [&](double mu_value) {
        const double lo = std::log(mu_value * std::exp(mu_value)) + 0.3;
        const double hi = std::log(mu_value * std::exp(mu_value)) + 4.0;
        return make_family("blowflies", {{"mu", mu_value}, {"c", c}, {"tau", tau}},
                           "log_beta0", lo, hi);
    };
    const ModelFamily family = family_at(mu);
    const ChebyshevMesh mesh = build_mesh(20, tau);
    const Branch branch = continue_equilibria(
        family, mesh,
        (std::log(std::exp(family.from) / mu) - mu) * mu * std::exp(mu) / c, 25);
    const auto bifs = detect_bifurcations(branch, family, mesh);
    REQUIRE(bifs.size() == 1);
    REQUIRE(bifs[0].kind == BifurcationKind::hopf);
    const double omega = std::abs(bifs[0].eigenvalue.imag());
    CHECK(std::tan(omega) == doctest::Approx(-omega / mu).epsilon(1e-3));
}
