#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "renewal/system.hpp"

namespace renewal {

/// An adaptive integration record. States and derivatives at accepted steps
/// support cubic-Hermite dense output; b_values holds the reconstructed
/// current value F(x(t)) per step.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> derivs;
    std::vector<double> b_values;
};

/// Integrate dx/dt = rhs(system, x) with an embedded Dormand-Prince 5(4)
/// pair; local error per step bounded by rtol * |x| + atol componentwise.
/// Throws NumericError on step-size underflow.
Trajectory integrate(const DiscretizedSystem& system, const Eigen::VectorXd& x0,
                     double t_end, double rtol = 1e-8, double atol = 1e-10);

/// Dense state at time t by cubic Hermite between the bracketing steps.
Eigen::VectorXd sample_state(const Trajectory& traj, double t);

/// A periodic-orbit summary. Extraction fills everything except multipliers.
struct OrbitSummary {
    double period = 0.0;
    double b_max = 0.0;
    double b_min = 0.0;
    Eigen::VectorXd anchor_state;               ///< state at the last mean crossing
    std::vector<std::complex<double>> multipliers;
    double periodicity_score = 0.0;             ///< CV of crossing intervals
    int crossings = 0;
};

/// Locate a periodic regime in the post-transient tail: period from upward
/// crossings of b(t) through its tail mean, extremes from dense output.
/// Throws NotPeriodicError with fewer than 3 crossings or a flat signal.
OrbitSummary extract_orbit(const DiscretizedSystem& system, const Trajectory& traj,
                           double transient_fraction = 0.8);

struct MonodromyResult {
    Eigen::MatrixXd matrix;        ///< fundamental solution over one period
    Eigen::VectorXd end_state;     ///< x(T)
    double closure_defect = 0.0;   ///< |x(T) - anchor|
    bool closure_warning = false;  ///< defect exceeded 1e-3 * |anchor|
};

/// Fundamental matrix solution of the variational system dPhi/dt = J(x(t)) Phi
/// over one period, integrated jointly with the state.
MonodromyResult monodromy(const DiscretizedSystem& system,
                          const Eigen::VectorXd& anchor, double period,
                          double rtol = 1e-9, double atol = 1e-11);

/// Eigenvalues of a monodromy matrix, sorted by descending modulus.
std::vector<std::complex<double>> floquet_multipliers(const Eigen::MatrixXd& monodromy);

struct PeriodicOrbit {
    Eigen::VectorXd anchor;
    double period = 0.0;
    double residual = 0.0;  ///< |x(T) - anchor| at the accepted iterate
    MonodromyResult mono;   ///< monodromy at the refined orbit
};

/// Polish (anchor, period) into a periodic solution by single-shooting
/// Newton with a flow-orthogonal phase condition. Works on mildly unstable
/// orbits too, which simulation alone cannot reach. Throws
/// IterationLimitError on non-convergence.
PeriodicOrbit refine_orbit(const DiscretizedSystem& system, Eigen::VectorXd anchor,
                           double period, double rtol = 1e-10, double atol = 1e-12,
                           int max_iter = 15);

/// Min and max of the reconstructed b over one period from an anchor.
std::pair<double, double> orbit_range(const DiscretizedSystem& system,
                                      const Eigen::VectorXd& anchor, double period,
                                      double rtol = 1e-9, double atol = 1e-11);

}  // namespace renewal
