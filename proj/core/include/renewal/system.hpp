#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "renewal/mesh.hpp"
#include "renewal/model.hpp"

namespace renewal {

/// The M-dimensional ODE  dx/dt = D x - F(x) * 1  obtained by collocating the
/// integrated history on the mesh. Per-term evaluation matrices map the state
/// to the reconstructed history values at that term's quadrature nodes;
/// folded weights are quadrature weights times kernel values there. Both are
/// precomputed at construction, so one right-hand-side call costs
/// O(m*nq*M + M^2) with no inner solves.
struct DiscretizedSystem {
    ChebyshevMesh mesh;
    RenewalModel model;
    int nq = 0;  ///< quadrature resolution per term

    std::vector<Eigen::MatrixXd> eval_matrices;   ///< per term, nq x M
    std::vector<Eigen::VectorXd> folded_weights;  ///< per term, length nq
    std::vector<Eigen::RowVectorXd> linear_rows;  ///< folded^T * E for linear terms, else empty
};

/// Assemble the system. nq = 0 selects max(2M, 32).
/// Throws std::invalid_argument if model.tau != mesh.tau.
DiscretizedSystem build_system(const ChebyshevMesh& mesh, const RenewalModel& model,
                               int nq = 0);

/// Right-hand side D x - F(x) * 1. Throws NumericError (with the term index)
/// if an integral comes out non-finite.
Eigen::VectorXd rhs(const DiscretizedSystem& system, const Eigen::VectorXd& x);

/// The scalar F(x): the reconstructed current value of the renewal unknown.
double birth_rate(const DiscretizedSystem& system, const Eigen::VectorXd& x);

/// Gradient row of the scalar birth rate at x.
Eigen::RowVectorXd gradient_row(const DiscretizedSystem& system,
                                const Eigen::VectorXd& x);

/// Analytic Jacobian D - 1 * grad F(x)^T.
Eigen::MatrixXd jacobian(const DiscretizedSystem& system, const Eigen::VectorXd& x);

/// Central finite-difference Jacobian of the right-hand side (cross-check).
Eigen::MatrixXd jacobian_fd(const DiscretizedSystem& system, const Eigen::VectorXd& x,
                            double step = 1e-6);

/// State vector of the equilibrium with constant value b_bar: x_j = b_bar * theta_j.
Eigen::VectorXd equilibrium_lift(double b_bar, const ChebyshevMesh& mesh);

/// Recover b_bar from an equilibrium state as the mean of x_j / theta_j.
/// Throws NotAnEquilibriumError if the relative spread of the ratios
/// exceeds 1e-6.
double equilibrium_project(const Eigen::VectorXd& x, const ChebyshevMesh& mesh);

/// Scalar fixed point of b -> F(constant history b), by damped Newton with a
/// finite-difference derivative. Throws IterationLimitError on
/// non-convergence within 100 iterations.
double solve_equilibrium(const RenewalModel& model, double guess,
                         double tol = 1e-12, int nq = 256);

/// State corresponding to an initial history: x_j = -int_{theta_j}^{0} phi.
Eigen::VectorXd history_to_state(const std::function<double(double)>& phi,
                                 const ChebyshevMesh& mesh, int nq = 64);

/// Diagnostic: |F(x) at resolution nq - F(x) at 2nq|, the quadrature
/// contribution to the error at state x.
double quadrature_refinement_error(const ChebyshevMesh& mesh, const RenewalModel& model,
                                   const Eigen::VectorXd& x, int nq);

}  // namespace renewal
