#pragma once

#include <Eigen/Dense>

namespace renewal {

/// Chebyshev-zeros mesh on [-tau, 0] augmented with the endpoint theta_0 = 0.
///
/// Nodes are stored descending: theta_0 = 0 > theta_1 > ... > theta_M > -tau,
/// with theta_j = (tau/2) * (cos((2j-1)pi/(2M)) - 1) for j = 1..M. The interior
/// nodes never include -tau, so differentiation of interpolants pinned to zero
/// at theta_0 is well posed on the interior block alone.
struct ChebyshevMesh {
    int M = 0;        ///< number of interior nodes
    double tau = 0;   ///< interval length; domain is [-tau, 0]

    Eigen::VectorXd nodes;             ///< length M+1, theta_0 = 0 first
    Eigen::VectorXd bary_weights;      ///< length M+1, augmented mesh, scaled to max |w| = 1
    Eigen::VectorXd bary_weights_sub;  ///< length M, interior mesh only
    Eigen::MatrixXd diff_full;         ///< (M+1) x (M+1) differentiation matrix
    Eigen::MatrixXd diff_sub;          ///< M x M interior block (rows/cols 1..M)
    Eigen::VectorXd quad_weights;      ///< length M, Fejer rule on interior nodes, sums to tau
};

/// Which angle enters the Fejer-weight cosine series. `half` is the standard
/// first rule on Chebyshev zeros, xi_k = (2k-1)pi/(2n); `full` uses
/// xi_k = (2k-1)pi/n and fails polynomial exactness beyond degree 0
/// (kept so the failure is testable).
enum class FejerAngle { half, full };

/// Fejer quadrature weights for the n Chebyshev zeros on [-1, 1].
Eigen::VectorXd fejer_weights(int n, FejerAngle angle = FejerAngle::half);

/// Build the mesh, barycentric weights, differentiation matrices and
/// quadrature weights for a given discretization index and delay.
/// Throws std::invalid_argument for M < 1 or tau <= 0.
ChebyshevMesh build_mesh(int M, double tau);

/// Evaluate the degree-<=M interpolant through (nodes, values) at the given
/// points using the second barycentric formula. Points coinciding with a node
/// (within 1e-14 * tau) return the nodal value directly.
/// Throws std::domain_error for points outside [-tau, 0].
Eigen::VectorXd interpolate(const ChebyshevMesh& mesh,
                            const Eigen::VectorXd& values,
                            const Eigen::VectorXd& points);

/// Matrix E of shape |points| x M with (E x)_i = p'(points_i), where
/// p = sum_j x_j l_j is the interpolant with value 0 at theta_0. Built as
/// (interior barycentric interpolation to points) * diff_sub, since p' has
/// degree M-1 and is determined by its interior nodal values.
Eigen::MatrixXd derivative_eval_matrix(const ChebyshevMesh& mesh,
                                       const Eigen::VectorXd& points);

struct QuadratureRule {
    Eigen::VectorXd nodes;    ///< ascending, strictly inside (a, b)
    Eigen::VectorXd weights;  ///< sum to b - a
};

/// Fejer rule with n nodes on [a, b]; exact for polynomials of degree <= n-1.
/// Throws std::invalid_argument for a >= b or n < 1.
QuadratureRule quad_on_subinterval(double a, double b, int n);

/// Numerical estimate of the Lebesgue constant of interpolation on the
/// interior nodes, via a uniform sample of [-tau, 0].
/// Throws std::invalid_argument if sample_density < 10 * M.
double lebesgue_constant(const ChebyshevMesh& mesh, int sample_density);

/// Barycentric interpolation matrix from (nodes, weights) to points: row i
/// holds the Lagrange basis values at points[i]. Coincident points (within
/// coincidence_tol) produce a unit row.
Eigen::MatrixXd barycentric_matrix(const Eigen::VectorXd& nodes,
                                   const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& points,
                                   double coincidence_tol);

}  // namespace renewal
