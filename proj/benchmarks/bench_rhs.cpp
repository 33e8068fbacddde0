#include <benchmark/benchmark.h>

#include <cmath>

#include "renewal/renewal.hpp"

using namespace renewal;

namespace {

DiscretizedSystem make_current(int M) {
    return build_system(build_mesh(M, 3.0), cannibalism_model(std::exp(3.0), 3.0));
}

LegacySystem make_legacy(int M) {
    return build_legacy_system(build_mesh(M, 3.0), cannibalism_model(std::exp(3.0), 3.0));
}

}  // namespace

static void BM_current_rhs(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    const DiscretizedSystem system = make_current(M);
    const Eigen::VectorXd x = equilibrium_lift(3.0, system.mesh);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rhs(system, x).sum());
    }
}
BENCHMARK(BM_current_rhs)->Arg(10)->Arg(15)->Arg(20)->Arg(40);

static void BM_legacy_rhs(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    const LegacySystem system = make_legacy(M);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(M, 3.0 * 1.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(legacy_rhs(system, y).sum());
    }
}
BENCHMARK(BM_legacy_rhs)->Arg(10)->Arg(15)->Arg(20)->Arg(40);

static void BM_current_jacobian(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    const DiscretizedSystem system = make_current(M);
    const Eigen::VectorXd x = equilibrium_lift(3.0, system.mesh);
    for (auto _ : state) {
        benchmark::DoNotOptimize(jacobian(system, x).sum());
    }
}
BENCHMARK(BM_current_jacobian)->Arg(10)->Arg(20)->Arg(40);

static void BM_equilibrium_spectrum(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    const DiscretizedSystem system = make_current(M);
    const Eigen::VectorXd x = equilibrium_lift(3.0, system.mesh);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigenvalues(system, x).rightmost);
    }
}
BENCHMARK(BM_equilibrium_spectrum)->Arg(10)->Arg(20)->Arg(40);

static void BM_build_system(benchmark::State& state) {
    const int M = static_cast<int>(state.range(0));
    const ChebyshevMesh mesh = build_mesh(M, 3.0);
    const RenewalModel model = cannibalism_model(std::exp(3.0), 3.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_system(mesh, model).nq);
    }
}
BENCHMARK(BM_build_system)->Arg(10)->Arg(20)->Arg(40);

BENCHMARK_MAIN();
