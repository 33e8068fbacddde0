#include <doctest.h>

#include <cmath>
#include <complex>

#include "renewal/errors.hpp"
#include "renewal/spectral.hpp"

using namespace renewal;

namespace {

using Complex = std::complex<double>;

RenewalModel zero_model(double tau) {
    RenewalModel model;
    model.tau = tau;
    model.combiner = [](const Eigen::VectorXd&) { return 0.0; };
    model.combiner_gradient = [](const Eigen::VectorXd&) { return Eigen::VectorXd(); };
    return model;
}

IntegralTerm const_kernel_term(double value, double lo, double hi) {
    IntegralTerm t;
    t.kernel = [value](double) { return value; };
    t.support_lo = lo;
    t.support_hi = hi;
    t.linear = true;
    return t;
}

// real root of 1 = gamma (1 - e^{-lambda tau}) / lambda by bisection
double bisect_constant_kernel_root(double gamma, double tau, double lo, double hi) {
    auto chi = [&](double lam) {
        if (std::abs(lam) < 1e-12) return 1.0 - gamma * tau;
        return 1.0 - gamma * (1.0 - std::exp(-lam * tau)) / lam;
    };
    REQUIRE(chi(lo) * chi(hi) < 0.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi(lo) * chi(mid) <= 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// chi_M as a CharFn; derivative via a second resolvent solve
CharFn discrete_char_fn(const Eigen::MatrixXd& D, const Eigen::RowVectorXd& K) {
    CharFn fn;
    fn.evaluate = [D, K](Complex lambda) { return char_discrete(D, K, lambda); };
    fn.derivative = [D, K](Complex lambda) {
        Eigen::MatrixXcd shifted = -D.cast<Complex>();
        shifted.diagonal().array() += lambda;
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
        const Eigen::VectorXcd y = lu.solve(-Eigen::VectorXcd::Ones(D.rows()));
        // d/dlambda [1 - K (lambda I - D)^{-1} (-1)] = K (lambda I - D)^{-2} (-1)
        return -(K.cast<Complex>() * lu.solve(y))(0);
    };
    return fn;
}

}  // namespace

TEST_CASE("spectrum ordering and conjugate pairing") {
    Eigen::MatrixXd A(4, 4);
    A << 0, 1, 0, 0, -4, 0, 0, 0, 0, 0, -2, 0, 0, 0, 0, -3;
    const Spectrum spec = matrix_spectrum(A, SpectrumSource::jacobian);
    CHECK(spec.eigenvalues.size() == 4);
    CHECK(spec.rightmost == spec.eigenvalues.front());
    CHECK(spec.eigenvalues[0].imag() == doctest::Approx(2.0));   // +2i first
    CHECK(spec.eigenvalues[1].imag() == doctest::Approx(-2.0));  // then -2i
    CHECK(spec.eigenvalues[2].real() == doctest::Approx(-2.0));
    CHECK(spec.eigenvalues[3].real() == doctest::Approx(-3.0));
}

TEST_CASE("conjugate symmetry of jacobian spectra") {
    const ChebyshevMesh mesh = build_mesh(16, 3.0);
    const RenewalModel model = cannibalism_model(std::exp(3.0), 3.0);
    const DiscretizedSystem system = build_system(mesh, model);
    const double b = solve_equilibrium(model, 2.0);
    const Spectrum spec = eigenvalues(system, equilibrium_lift(b, mesh));
    for (const Complex& ev : spec.eigenvalues) {
        if (std::abs(ev.imag()) < 1e-12) continue;
        const bool paired = std::any_of(
            spec.eigenvalues.begin(), spec.eigenvalues.end(),
            [&](const Complex& other) { return std::abs(other - std::conj(ev)) <= 1e-10; });
        CHECK(paired);
    }
}

TEST_CASE("eigenvalues requires an equilibrium") {
    const ChebyshevMesh mesh = build_mesh(10, 3.0);
    const DiscretizedSystem system = build_system(mesh, cannibalism_model(std::exp(2.0), 3.0));
    CHECK_THROWS_AS(eigenvalues(system, Eigen::VectorXd::Ones(10)), std::invalid_argument);
}

TEST_CASE("vanishing rule reduces to the differentiation spectrum") {
    const ChebyshevMesh mesh = build_mesh(12, 2.0);
    const DiscretizedSystem system = build_system(mesh, zero_model(2.0));
    const Spectrum got = eigenvalues(system, Eigen::VectorXd::Zero(12));
    const Spectrum expected = matrix_spectrum(mesh.diff_sub, SpectrumSource::jacobian);
    for (size_t i = 0; i < got.eigenvalues.size(); ++i)
        CHECK(std::abs(got.eigenvalues[i] - expected.eigenvalues[i]) <= 1e-12);
}

TEST_CASE("rightmost pair sits on the axis at the cannibalism Hopf value") {
    // crossing at log gamma = 1 + pi/2 with frequency pi/2
    const double log_gamma = 1.0 + std::acos(-1.0) / 2.0;
    const RenewalModel model = cannibalism_model(std::exp(log_gamma), 3.0);
    const ChebyshevMesh mesh = build_mesh(20, 3.0);
    const DiscretizedSystem system = build_system(mesh, model);
    const double b = solve_equilibrium(model, 2.0);
    const Spectrum spec = eigenvalues(system, equilibrium_lift(b, mesh));
    CHECK(std::abs(spec.rightmost.real()) < 1e-3);
    CHECK(std::abs(spec.rightmost.imag()) > 1.0);
}

TEST_CASE("sirs trivial equilibrium crosses zero at gamma = 1") {
    const ChebyshevMesh mesh = build_mesh(20, 1.0);
    const DiscretizedSystem system = build_system(mesh, sirs_model(1.0));
    const Spectrum spec = eigenvalues(system, Eigen::VectorXd::Zero(20));
    const bool has_zero = std::any_of(
        spec.eigenvalues.begin(), spec.eigenvalues.end(),
        [](const Complex& ev) { return std::abs(ev) <= 1e-6; });
    CHECK(has_zero);
}

TEST_CASE("true characteristic function") {
    SUBCASE("constant kernel: chi(0) = 1 - gamma tau") {
        const double gamma = 0.4, tau = 2.0;
        const CharFn chi = char_true({const_kernel_term(gamma, -tau, 0.0)});
        CHECK(std::abs(chi.evaluate(0.0) - (1.0 - gamma * tau)) <= 1e-13);
    }

    SUBCASE("zero kernel: identically one, no roots") {
        const CharFn chi = char_true({const_kernel_term(0.0, -2.0, 0.0)});
        CHECK(chi.evaluate(Complex(0.3, 1.2)) == Complex(1.0, 0.0));
        const RootSearch search = find_char_roots(chi, {Complex(0.1, 0.0)});
        CHECK(search.roots.empty());
        CHECK(search.failed_seeds == 1);
    }

    SUBCASE("smooth through the origin: matches the series of the resolvent kernel") {
        const double gamma = 0.4, tau = 2.0;
        const CharFn chi = char_true({const_kernel_term(gamma, -tau, 0.0)});
        const Complex lam(1e-9, 0.0);
        // 1 - gamma (1 - e^{-lam tau})/lam ~ 1 - gamma (tau - lam tau^2/2)
        const Complex series = 1.0 - gamma * (tau - lam * tau * tau / 2.0);
        CHECK(std::abs(chi.evaluate(lam) - series) <= 1e-12);
    }

    SUBCASE("rejects nonlinear terms") {
        IntegralTerm t = const_kernel_term(1.0, -2.0, -1.0);
        t.linear = false;
        CHECK_THROWS_AS(char_true({t}), std::invalid_argument);
    }
}

TEST_CASE("psi_lambda handles the removable singularity") {
    CHECK(psi_lambda(0.0, -1.5) == Complex(-1.5, 0.0));
    const Complex tiny(1e-10, 1e-10);
    const Complex direct = psi_lambda(Complex(1e-4, 0.0), -1.5);
    CHECK(std::abs(psi_lambda(tiny, -1.5) - Complex(-1.5, 0.0)) < 1e-9);
    CHECK(std::abs(direct - (std::exp(Complex(1e-4, 0.0) * -1.5) - 1.0) / Complex(1e-4, 0.0)) ==
          0.0);
}

TEST_CASE("discrete characteristic function") {
    const double tau = 2.0;
    const ChebyshevMesh mesh = build_mesh(12, tau);

    SUBCASE("exact value at zero for constant kernels") {
        for (double gt : {0.5, 0.9, 1.5}) {
            const double gamma = gt / tau;
            const Eigen::RowVectorXd K =
                kernel_row(mesh, {const_kernel_term(gamma, -tau, 0.0)});
            CHECK(std::abs(char_discrete(mesh.diff_sub, K, 0.0) - Complex(1.0 - gt, 0.0)) <=
                  1e-11);
        }
    }

    SUBCASE("zero kernel row gives one") {
        const Eigen::RowVectorXd K = Eigen::RowVectorXd::Zero(mesh.M);
        CHECK(char_discrete(mesh.diff_sub, K, Complex(0.2, 0.7)) == Complex(1.0, 0.0));
    }

    SUBCASE("zeros coincide with the eigenvalues of D - 1 K") {
        const double gamma = 0.45;
        const Eigen::RowVectorXd K = kernel_row(mesh, {const_kernel_term(gamma, -tau, 0.0)});
        const Eigen::MatrixXd A =
            mesh.diff_sub - Eigen::VectorXd::Ones(mesh.M) * K;
        const Spectrum spec = matrix_spectrum(A, SpectrumSource::jacobian);
        const CharFn chi = discrete_char_fn(mesh.diff_sub, K);
        for (int i = 0; i < 5; ++i) {
            const Complex seed = spec.eigenvalues[static_cast<size_t>(i)];
            const RootSearch search = find_char_roots(chi, {seed}, 1e-12);
            REQUIRE(search.roots.size() == 1);
            CHECK(std::abs(search.roots[0] - seed) <= 1e-8);
        }
    }

    SUBCASE("near-pole shifts are refused with a condition estimate") {
        const Eigen::RowVectorXd K =
            kernel_row(mesh, {const_kernel_term(0.3, -tau, 0.0)});
        const Spectrum dspec = matrix_spectrum(mesh.diff_sub, SpectrumSource::jacobian);
        CHECK_THROWS_AS(char_discrete(mesh.diff_sub, K, dspec.eigenvalues[0]),
                        NearPoleError);
    }
}

TEST_CASE("root finding on characteristic functions") {
    SUBCASE("unit-mass constant kernel has the root zero") {
        const double tau = 2.0;
        const CharFn chi = char_true({const_kernel_term(1.0 / tau, -tau, 0.0)});
        const RootSearch search = find_char_roots(chi, {Complex(0.1, 0.0)}, 1e-12);
        REQUIRE(search.roots.size() == 1);
        CHECK(std::abs(search.roots[0]) <= 1e-10);
    }

    SUBCASE("duplicate seeds collapse to one root") {
        const double tau = 2.0;
        const CharFn chi = char_true({const_kernel_term(1.0 / tau, -tau, 0.0)});
        const RootSearch search =
            find_char_roots(chi, {Complex(0.1, 0.0), Complex(-0.05, 0.0)}, 1e-12);
        CHECK(search.roots.size() == 1);
    }

    SUBCASE("discrete spectrum seeds the true roots of the linearized rule") {
        const double gamma = std::exp(2.4), tau = 3.0;
        const RenewalModel model = cannibalism_model(gamma, tau);
        const double b = solve_equilibrium(model, 2.0);
        const CharFn chi = char_true(linearize_at(model, b));

        const ChebyshevMesh mesh = build_mesh(40, tau);
        const DiscretizedSystem system = build_system(mesh, model);
        const Spectrum spec = eigenvalues(system, equilibrium_lift(b, mesh));
        std::vector<Complex> seeds(spec.eigenvalues.begin(), spec.eigenvalues.begin() + 6);
        const RootSearch search = find_char_roots(chi, seeds, 1e-10);
        CHECK(search.failed_seeds == 0);
        for (const Complex& root : search.roots)
            CHECK(std::abs(chi.evaluate(root)) <= 1e-10);
    }
}

TEST_CASE("discrete rightmost root matches the scalar bisection oracle") {
    const double tau = 2.0, gamma = 0.5 / tau;  // gamma tau = 0.5
    const ChebyshevMesh mesh = build_mesh(20, tau);
    const Eigen::RowVectorXd K = kernel_row(mesh, {const_kernel_term(gamma, -tau, 0.0)});
    const Eigen::MatrixXd A = mesh.diff_sub - Eigen::VectorXd::Ones(mesh.M) * K;
    const Spectrum spec = matrix_spectrum(A, SpectrumSource::jacobian);
    const double oracle = bisect_constant_kernel_root(gamma, tau, -10.0, -1e-9);
    CHECK(std::abs(spec.rightmost - Complex(oracle, 0.0)) <= 1e-8);
}

TEST_CASE("convergence study of the rightmost root") {
    const RenewalModel model = cannibalism_model(std::exp(2.57), 3.0);
    const double b = solve_equilibrium(model, 2.5);

    SUBCASE("reference included gives zero error") {
        const auto table = convergence_study(model, b, {40}, 40);
        REQUIRE(table.size() == 1);
        CHECK(table[0].error == 0.0);
    }

    SUBCASE("errors decay geometrically until the floor") {
        const auto table = convergence_study(model, b, {10, 15, 20, 25, 30}, 40);
        REQUIRE(table.size() == 5);
        CHECK(table[0].error > 1e-9);  // coarse meshes are away from the floor
        for (size_t i = 0; i + 1 < table.size(); ++i) {
            const bool decayed = table[i + 1].error < 0.5 * table[i].error;
            const bool floored = table[i + 1].error <= 1e-9;
            CHECK((decayed || floored));
        }
        CHECK(table.back().error <= 1e-9);
    }

    SUBCASE("rightmost root is approximated at least as well as a deeper one") {
        const int M = 10, ref = 40;
        const ChebyshevMesh mesh_ref = build_mesh(ref, model.tau);
        const Spectrum spec_ref = eigenvalues(build_system(mesh_ref, model),
                                              equilibrium_lift(b, mesh_ref));
        const ChebyshevMesh mesh_c = build_mesh(M, model.tau);
        const Spectrum spec_c = eigenvalues(build_system(mesh_c, model),
                                            equilibrium_lift(b, mesh_c));
        auto nearest_error = [&](const Complex& target) {
            double best = 1e300;
            for (const Complex& ev : spec_c.eigenvalues)
                best = std::min(best, std::abs(ev - target));
            return best;
        };
        const Complex rightmost = spec_ref.eigenvalues[0];
        // pick a reference root of visibly larger modulus
        Complex deeper = rightmost;
        for (const Complex& ev : spec_ref.eigenvalues)
            if (std::abs(ev) > 2.0 * std::abs(rightmost)) { deeper = ev; break; }
        REQUIRE(deeper != rightmost);
        CHECK(nearest_error(rightmost) <= nearest_error(deeper));
    }

    SUBCASE("reference must dominate the list") {
        CHECK_THROWS_AS(convergence_study(model, b, {10, 50}, 40), std::invalid_argument);
    }
}
