#include "renewal/mesh.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace renewal {

namespace {

constexpr double kPi = std::numbers::pi;

// Angles of the Chebyshev zeros of degree M: xi_j = (2j-1)pi/(2M), j = 1..M.
Eigen::VectorXd zero_angles(int M) {
    Eigen::VectorXd xi(M);
    for (int j = 1; j <= M; ++j) xi[j - 1] = (2.0 * j - 1.0) * kPi / (2.0 * M);
    return xi;
}

}  // namespace

Eigen::VectorXd fejer_weights(int n, FejerAngle angle) {
    if (n < 1) throw std::invalid_argument("fejer_weights: n must be >= 1");
    Eigen::VectorXd q(n);
    for (int k = 1; k <= n; ++k) {
        const double xi = angle == FejerAngle::half ? (2.0 * k - 1.0) * kPi / (2.0 * n)
                                                    : (2.0 * k - 1.0) * kPi / n;
        double s = 0.0;
        for (int j = 1; j <= n / 2; ++j) s += std::cos(2.0 * j * xi) / (4.0 * j * j - 1.0);
        q[k - 1] = 2.0 / n * (1.0 - 2.0 * s);
    }
    return q;
}

ChebyshevMesh build_mesh(int M, double tau) {
    if (M < 1) throw std::invalid_argument("build_mesh: M must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("build_mesh: tau must be > 0");

    ChebyshevMesh mesh;
    mesh.M = M;
    mesh.tau = tau;

    const Eigen::VectorXd xi = zero_angles(M);

    mesh.nodes.resize(M + 1);
    mesh.nodes[0] = 0.0;
    for (int j = 1; j <= M; ++j)
        mesh.nodes[j] = tau / 2.0 * (std::cos(xi[j - 1]) - 1.0);

    // Barycentric weights on the augmented mesh {1} u {x_j}, direct-product
    // sign convention, with the common factor 2^{M-1}/M dropped:
    //   w_0 = M          (since prod_k (1 - x_k) = 2^{1-M})
    //   w_j = (-1)^j * sin(xi_j) / (x_j - 1) = (-1)^j * cot(xi_j / 2)
    // using x_j - 1 = -2 sin^2(xi_j/2). The vector is then scaled to
    // max |w| = 1; the barycentric formula and the c_k/c_j ratios in the
    // differentiation matrix are invariant under that common scaling.
    mesh.bary_weights.resize(M + 1);
    mesh.bary_weights[0] = static_cast<double>(M);
    for (int j = 1; j <= M; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        mesh.bary_weights[j] = sign / std::tan(xi[j - 1] / 2.0);
    }
    mesh.bary_weights /= mesh.bary_weights.cwiseAbs().maxCoeff();

    // Interior-only weights: w_j = (-1)^{j+1} sin(xi_j), same scaling rule.
    mesh.bary_weights_sub.resize(M);
    for (int j = 1; j <= M; ++j) {
        const double sign = (j % 2 == 0) ? -1.0 : 1.0;
        mesh.bary_weights_sub[j - 1] = sign * std::sin(xi[j - 1]);
    }
    mesh.bary_weights_sub /= mesh.bary_weights_sub.cwiseAbs().maxCoeff();

    // Differentiation matrix on the augmented mesh. Off-diagonal entries are
    // (1/(x_k - x_j)) * (w_j / w_k); node differences use the identity
    // cos a - cos b = 2 sin((a+b)/2) sin((b-a)/2) to avoid cancellation.
    // Diagonal entries impose zero row sums. Scaling to [-tau, 0] multiplies
    // by 2/tau.
    Eigen::VectorXd xiAug(M + 1);
    xiAug[0] = 0.0;
    xiAug.tail(M) = xi;

    mesh.diff_full.resize(M + 1, M + 1);
    for (int k = 0; k <= M; ++k) {
        double rowsum = 0.0;
        for (int j = 0; j <= M; ++j) {
            if (j == k) continue;
            const double dx = 2.0 * std::sin((xiAug[k] + xiAug[j]) / 2.0) *
                              std::sin((xiAug[j] - xiAug[k]) / 2.0);
            const double d = (mesh.bary_weights[j] / mesh.bary_weights[k]) / dx;
            mesh.diff_full(k, j) = d;
            rowsum += d;
        }
        mesh.diff_full(k, k) = -rowsum;
    }
    mesh.diff_full *= 2.0 / tau;
    mesh.diff_sub = mesh.diff_full.bottomRightCorner(M, M);

    mesh.quad_weights = tau / 2.0 * fejer_weights(M, FejerAngle::half);
    return mesh;
}

Eigen::MatrixXd barycentric_matrix(const Eigen::VectorXd& nodes,
                                   const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& points,
                                   double coincidence_tol) {
    const auto n = nodes.size();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(points.size(), n);
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        const double t = points[i];
        Eigen::Index hit = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(t - nodes[j]) < coincidence_tol) { hit = j; break; }
        }
        if (hit >= 0) {
            B(i, hit) = 1.0;
            continue;
        }
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double r = weights[j] / (t - nodes[j]);
            B(i, j) = r;
            denom += r;
        }
        B.row(i) /= denom;
    }
    return B;
}

namespace {

void check_domain(const ChebyshevMesh& mesh, const Eigen::VectorXd& points) {
    const double slack = 1e-12 * std::max(1.0, mesh.tau);
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        if (points[i] < -mesh.tau - slack || points[i] > slack)
            throw std::domain_error("evaluation point outside [-tau, 0]");
    }
}

}  // namespace

Eigen::VectorXd interpolate(const ChebyshevMesh& mesh,
                            const Eigen::VectorXd& values,
                            const Eigen::VectorXd& points) {
    if (values.size() != mesh.M + 1)
        throw std::invalid_argument("interpolate: values must have length M+1");
    check_domain(mesh, points);
    const Eigen::MatrixXd B = barycentric_matrix(mesh.nodes, mesh.bary_weights,
                                                 points, 1e-14 * mesh.tau);
    return B * values;
}

Eigen::MatrixXd derivative_eval_matrix(const ChebyshevMesh& mesh,
                                       const Eigen::VectorXd& points) {
    check_domain(mesh, points);
    const Eigen::MatrixXd B =
        barycentric_matrix(mesh.nodes.tail(mesh.M), mesh.bary_weights_sub,
                           points, 1e-14 * mesh.tau);
    return B * mesh.diff_sub;
}

QuadratureRule quad_on_subinterval(double a, double b, int n) {
    if (!(a < b)) throw std::invalid_argument("quad_on_subinterval: need a < b");
    if (n < 1) throw std::invalid_argument("quad_on_subinterval: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    const Eigen::VectorXd xi = zero_angles(n);
    for (int j = 0; j < n; ++j) {
        // ascending order: reverse the descending cos sequence
        rule.nodes[n - 1 - j] = (b + a) / 2.0 + (b - a) / 2.0 * std::cos(xi[j]);
    }
    rule.weights = (b - a) / 2.0 * fejer_weights(n, FejerAngle::half).reverse();
    return rule;
}

double lebesgue_constant(const ChebyshevMesh& mesh, int sample_density) {
    if (sample_density < 10 * mesh.M)
        throw std::invalid_argument("lebesgue_constant: sample_density must be >= 10*M");
    Eigen::VectorXd sample(sample_density);
    for (int i = 0; i < sample_density; ++i)
        sample[i] = -mesh.tau + mesh.tau * i / (sample_density - 1.0);
    const Eigen::MatrixXd B =
        barycentric_matrix(mesh.nodes.tail(mesh.M), mesh.bary_weights_sub,
                           sample, 1e-14 * mesh.tau);
    return B.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace renewal
