#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "renewal/mesh.hpp"
#include "renewal/model.hpp"

namespace renewal {

/// Reconstruction of the earlier direct-discretization scheme: the state is
/// the vector of history values on the interior nodes, and every
/// right-hand-side call closes the mesh by solving the scalar equation
/// y0 = F(interpolant through (y0, y)) numerically before differentiating.
/// That inner algebraic solve is exactly what the integrated-state method
/// removes, and what drives the timing gap.
struct LegacySystem {
    ChebyshevMesh mesh;
    RenewalModel model;
    int nq = 0;
    double inner_tol = 1e-12;
    int inner_max_iter = 50;

    std::vector<Eigen::MatrixXd> eval_full;  ///< per term, nq x (M+1): augmented-mesh interpolation to quad nodes
    std::vector<Eigen::VectorXd> folded;     ///< per term, quadrature weights x kernel values
    mutable long inner_iterations = 0;       ///< cumulative inner Newton iterations (diagnostic)
};

/// Assemble the legacy system on the same mesh as the current method.
LegacySystem build_legacy_system(const ChebyshevMesh& mesh, const RenewalModel& model,
                                 int nq = 0);

/// Solve the closure value y0 = F(P(y0, y)) by damped Newton with a
/// finite-difference derivative. Throws NumericError on non-convergence.
double legacy_closure(const LegacySystem& system, const Eigen::VectorXd& y);

/// Interior rows of the full differentiation matrix applied to (y0, y), with
/// y0 from the inner solve.
Eigen::VectorXd legacy_rhs(const LegacySystem& system, const Eigen::VectorXd& y);

struct BenchRow {
    int M = 0;
    double legacy_rhs_seconds = 0.0;
    double current_rhs_seconds = 0.0;
    double rhs_ratio = 0.0;
    double legacy_continuation_seconds = 0.0;
    double current_continuation_seconds = 0.0;
    double continuation_ratio = 0.0;
    double inner_iterations_per_rhs = 0.0;
    bool low_confidence = false;  ///< fewer than 5 timing samples
};

/// Timing comparison of the two methods on identical meshes: median
/// per-call right-hand-side time over n_rhs_evals random bounded states,
/// and wall time of an n_continuation_points natural-parameter equilibrium
/// continuation driven by full-dimension Newton with finite-difference
/// Jacobians on each method's right-hand side. Random states are drawn
/// uniformly from [0, 2*b_ref]^M with the given seed.
std::vector<BenchRow> bench_compare(const ModelFamily& family, double b_ref,
                                    const std::vector<int>& M_list, int n_rhs_evals,
                                    int n_continuation_points, std::uint64_t seed);

}  // namespace renewal
