#include <doctest.h>

#include <cmath>

#include "renewal/dynamics.hpp"
#include "renewal/errors.hpp"

using namespace renewal;

namespace {

DiscretizedSystem cannibalism_system(double log_gamma, int M = 20, double tau = 3.0) {
    return build_system(build_mesh(M, tau), cannibalism_model(std::exp(log_gamma), tau));
}

}  // namespace

TEST_CASE("equilibria are fixed points of the integrator") {
    const DiscretizedSystem system = cannibalism_system(2.0);
    const double b = solve_equilibrium(system.model, 2.0);
    const Eigen::VectorXd x0 = equilibrium_lift(b, system.mesh);
    const Trajectory traj = integrate(system, x0, 10.0 * system.mesh.tau, 1e-10, 1e-12);
    for (const Eigen::VectorXd& x : traj.states)
        CHECK((x - x0).cwiseAbs().maxCoeff() <= 1e-12 + 1e-9);
}

TEST_CASE("subcritical linear rule decays") {
    const double tau = 2.0, gamma = 0.25;  // gamma tau = 0.5 < 1
    const ChebyshevMesh mesh = build_mesh(10, tau);
    const DiscretizedSystem system = build_system(mesh, constant_kernel_model(gamma, tau));
    Eigen::VectorXd x0(10);
    x0 << 0.4, -0.2, 0.9, 0.1, -0.5, 0.3, 0.8, -0.7, 0.2, 0.6;
    const Trajectory traj = integrate(system, x0, 8.0 * tau);
    CHECK(traj.states.back().norm() < 0.05 * x0.norm());
}

TEST_CASE("tolerance refinement is self-consistent") {
    const DiscretizedSystem system = cannibalism_system(3.0);
    const Eigen::VectorXd x0 =
        equilibrium_lift(1.02 * solve_equilibrium(system.model, 3.0), system.mesh);
    const double rtol = 1e-7;
    const Trajectory coarse = integrate(system, x0, 20.0, rtol, 1e-12);
    const Trajectory fine = integrate(system, x0, 20.0, rtol / 2.0, 1e-12);
    const double diff = (coarse.states.back() - fine.states.back()).norm();
    CHECK(diff <= 10.0 * rtol * (1.0 + fine.states.back().norm()));
}

TEST_CASE("integrate rejects a non-positive horizon") {
    const DiscretizedSystem system = cannibalism_system(2.0);
    CHECK_THROWS_AS(integrate(system, Eigen::VectorXd::Zero(20), 0.0),
                    std::invalid_argument);
}

TEST_CASE("orbit extraction") {
    SUBCASE("constant signal is not periodic") {
        const DiscretizedSystem system = cannibalism_system(2.0);
        const double b = solve_equilibrium(system.model, 2.0);
        const Trajectory traj =
            integrate(system, equilibrium_lift(b, system.mesh), 100.0);
        CHECK_THROWS_AS(extract_orbit(system, traj), NotPeriodicError);
    }

    SUBCASE("synthetic modulated lift recovers the forcing period") {
        // x(t) = (c + a sin(w t)) * theta is an exact Hermite-consistent
        // trajectory whose reconstructed b is periodic with period 2 pi / w
        const DiscretizedSystem system = cannibalism_system(2.0);
        const Eigen::VectorXd theta = system.mesh.nodes.tail(system.mesh.M);
        const double c = 0.5, a = 0.2, w = 1.7;
        Trajectory traj;
        const int n = 4000;
        for (int i = 0; i <= n; ++i) {
            const double t = 40.0 * i / n;
            traj.times.push_back(t);
            traj.states.push_back((c + a * std::sin(w * t)) * theta);
            traj.derivs.push_back(a * w * std::cos(w * t) * theta);
            traj.b_values.push_back(birth_rate(system, traj.states.back()));
        }
        const OrbitSummary orbit = extract_orbit(system, traj, 0.3);
        const double expected = 2.0 * std::acos(-1.0) / w;
        CHECK(std::abs(orbit.period - expected) <= 1e-3 * expected);
        CHECK(orbit.periodicity_score < 1e-3);
    }

    SUBCASE("cannibalism orbit past the Hopf point brackets the equilibrium") {
        const DiscretizedSystem system = cannibalism_system(3.0);
        const double b = solve_equilibrium(system.model, 3.0);  // = 3 at tau = 3
        const Trajectory traj = integrate(
            system, equilibrium_lift(1.01 * b, system.mesh), 200.0 * 3.0, 1e-8, 1e-10);
        const OrbitSummary orbit = extract_orbit(system, traj);
        CHECK(orbit.crossings >= 5);
        CHECK(orbit.b_min < b);
        CHECK(orbit.b_max > b);
        CHECK(orbit.period == doctest::Approx(4.0).epsilon(0.05));
        CHECK(orbit.periodicity_score < 1e-4);
    }
}

TEST_CASE("floquet multipliers of fixed matrices") {
    CHECK(floquet_multipliers(Eigen::MatrixXd::Identity(3, 3)) ==
          std::vector<std::complex<double>>{1.0, 1.0, 1.0});
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 0.5;
    D(1, 1) = 2.0;
    const auto mults = floquet_multipliers(D);
    CHECK(mults[0] == std::complex<double>(2.0, 0.0));
    CHECK(mults[1] == std::complex<double>(0.5, 0.0));
}

TEST_CASE("monodromy and shooting on the stable cannibalism orbit") {
    const DiscretizedSystem system = cannibalism_system(3.0);
    const double b = solve_equilibrium(system.model, 3.0);
    const Trajectory traj = integrate(
        system, equilibrium_lift(1.01 * b, system.mesh), 200.0 * 3.0, 1e-8, 1e-10);
    const OrbitSummary orbit = extract_orbit(system, traj);

    SUBCASE("trivial multiplier close to one before refinement") {
        const MonodromyResult mono =
            monodromy(system, orbit.anchor_state, orbit.period, 1e-10, 1e-12);
        const auto mults = floquet_multipliers(mono.matrix);
        double best = 1e300;
        for (const auto& mu : mults) best = std::min(best, std::abs(mu - 1.0));
        CHECK(best <= 5e-3);
    }

    SUBCASE("wrong period sets the closure warning") {
        const MonodromyResult mono =
            monodromy(system, orbit.anchor_state, 0.8 * orbit.period, 1e-9, 1e-11);
        CHECK(mono.closure_warning);
    }

    SUBCASE("shooting polishes the orbit and its multipliers") {
        const PeriodicOrbit refined =
            refine_orbit(system, orbit.anchor_state, orbit.period);
        CHECK(refined.residual <= 1e-10 * (1.0 + refined.anchor.norm()));
        CHECK(refined.period == doctest::Approx(orbit.period).epsilon(1e-3));

        const auto mults = floquet_multipliers(refined.mono.matrix);
        double trivial_gap = 1e300;
        for (const auto& mu : mults) trivial_gap = std::min(trivial_gap, std::abs(mu - 1.0));
        CHECK(trivial_gap <= 5e-3);

        // stability: everything except the trivial multiplier inside the circle
        int outside = 0;
        for (const auto& mu : mults)
            if (std::abs(mu) > 1.0 + 1e-6) ++outside;
        CHECK(outside == 0);

        // the second-closest multiplier to 1: an outlook remark suggests a
        // near-unit companion; observed value is reported, not asserted
        std::vector<double> gaps;
        for (const auto& mu : mults) gaps.push_back(std::abs(mu - 1.0));
        std::sort(gaps.begin(), gaps.end());
        MESSAGE("second-closest multiplier distance to 1: ", gaps[1]);

        // extremes over one refined period agree with the settled trajectory
        const auto [lo, hi] = orbit_range(system, refined.anchor, refined.period);
        CHECK(lo == doctest::Approx(orbit.b_min).epsilon(1e-3));
        CHECK(hi == doctest::Approx(orbit.b_max).epsilon(1e-3));
    }
}

TEST_CASE("orbit extremes agree between M=20 and M=40") {
    const DiscretizedSystem coarse = cannibalism_system(3.0, 20);
    const DiscretizedSystem fine = cannibalism_system(3.0, 40);
    const double b = 3.0;
    auto extremes = [&](const DiscretizedSystem& system) {
        const Trajectory traj = integrate(
            system, equilibrium_lift(1.01 * b, system.mesh), 200.0 * 3.0, 1e-8, 1e-10);
        const OrbitSummary orbit = extract_orbit(system, traj);
        return std::pair{orbit.b_min, orbit.b_max};
    };
    const auto [lo20, hi20] = extremes(coarse);
    const auto [lo40, hi40] = extremes(fine);
    CHECK(std::abs(lo20 - lo40) <= 1e-3 * std::abs(lo40));
    CHECK(std::abs(hi20 - hi40) <= 1e-3 * std::abs(hi40));
}

TEST_CASE("unstable branch past the period doubling carries a multiplier below -1") {
    // walk the orbit branch by shooting; simulation alone cannot hold the
    // unstable orbit past the doubling
    const DiscretizedSystem at3 = cannibalism_system(3.0);
    const Trajectory traj =
        integrate(at3, equilibrium_lift(1.01 * 3.0, at3.mesh), 200.0 * 3.0, 1e-8, 1e-10);
    const OrbitSummary orbit = extract_orbit(at3, traj);

    Eigen::VectorXd anchor = orbit.anchor_state;
    double period = orbit.period;
    for (double lg : {3.4, 3.7, 4.0}) {
        const DiscretizedSystem system = cannibalism_system(lg);
        const PeriodicOrbit refined = refine_orbit(system, anchor, period, 1e-9, 1e-11);
        anchor = refined.anchor;
        period = refined.period;
        if (lg == 4.0) {
            const auto mults = floquet_multipliers(refined.mono.matrix);
            double most_negative = 0.0;
            for (const auto& mu : mults)
                if (std::abs(mu.imag()) < 1e-6) most_negative = std::min(most_negative, mu.real());
            CHECK(most_negative < -1.0);
        }
    }
}
