#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "cli.hpp"
#include "renewal/dynamics.hpp"
#include "renewal/errors.hpp"

using namespace renewal;

TEST_CASE("sirs orbit past its Hopf point brackets the equilibrium") {
    // log gamma = 2.0 lies above the Hopf value ~1.6553
    const double gamma = std::exp(2.0);
    const RenewalModel model = sirs_model(gamma);
    const DiscretizedSystem system = build_system(build_mesh(20, 1.0), model);
    const double b = 1.0 - 1.0 / gamma;
    const Trajectory traj = integrate(
        system, equilibrium_lift(1.02 * b, system.mesh), 200.0, 1e-8, 1e-10);
    const OrbitSummary orbit = extract_orbit(system, traj);
    CHECK(orbit.b_min < b);
    CHECK(orbit.b_max > b);
    CHECK(orbit.b_min > 0.0);
    CHECK(orbit.periodicity_score < 1e-3);

    const PeriodicOrbit refined = refine_orbit(system, orbit.anchor_state, orbit.period);
    double trivial_gap = 1e300;
    for (const auto& mu : floquet_multipliers(refined.mono.matrix))
        trivial_gap = std::min(trivial_gap, std::abs(mu - 1.0));
    CHECK(trivial_gap <= 5e-3);
}

TEST_CASE("blowflies trajectory settles onto the stable equilibrium") {
    // beta0 well below the mu=4 Hopf value (~1950)
    const RenewalModel model = blowflies_model(600.0, 4.0, 100.0, 10.0);
    const DiscretizedSystem system = build_system(build_mesh(20, 10.0), model);
    const double b = solve_equilibrium(model, 3.0);
    const Trajectory traj = integrate(
        system, equilibrium_lift(1.2 * b, system.mesh), 300.0, 1e-8, 1e-10);
    CHECK(std::abs(traj.b_values.back() - b) <= 1e-5 * b);
    CHECK_THROWS_AS(extract_orbit(system, traj), NotPeriodicError);
}

TEST_CASE("thread cap from the environment steers the grid workers") {
    setenv("RENEWAL_SPECTRAL_THREADS", "1", 1);
    renewal::cli::RunConfig config;
    config.command = "hopf-curve";
    config.model_kind = "cannibalism";
    config.overrides = {{"tau", 3.0}};
    config.param = "log_gamma";
    config.from = 2.0;
    config.to = 3.0;
    config.points = 7;
    config.param2 = "tau";
    config.grid = {3.0};
    config.M = 12;
    config.start_b = 2.0;
    config.reproducible = true;
    config.out = "/tmp/renewal_test_threads.csv";
    CHECK(renewal::cli::run(config) == 0);
    unsetenv("RENEWAL_SPECTRAL_THREADS");

    std::FILE* f = std::fopen(config.out.c_str(), "r");
    REQUIRE(f);
    char buf[4096];
    const size_t n = std::fread(buf, 1, sizeof(buf) - 1, f);
    buf[n] = '\0';
    std::fclose(f);
    const std::string csv(buf);
    CHECK(csv.find("threads=1") != std::string::npos);
    CHECK(csv.find("2.57") != std::string::npos);  // the tau=3 Hopf location
    std::remove(config.out.c_str());
}
