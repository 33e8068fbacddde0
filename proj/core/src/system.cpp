#include "renewal/system.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "renewal/errors.hpp"

namespace renewal {

DiscretizedSystem build_system(const ChebyshevMesh& mesh, const RenewalModel& model,
                               int nq) {
    if (std::abs(model.tau - mesh.tau) > 1e-12 * std::max(1.0, mesh.tau))
        throw std::invalid_argument("build_system: model.tau does not match mesh.tau");
    if (nq == 0) nq = std::max(2 * mesh.M, 32);
    if (nq < 1) throw std::invalid_argument("build_system: nq must be >= 1");

    DiscretizedSystem system;
    system.mesh = mesh;
    system.model = model;
    system.nq = nq;

    for (const IntegralTerm& term : model.terms) {
        const QuadratureRule rule =
            quad_on_subinterval(term.support_lo, term.support_hi, nq);
        Eigen::MatrixXd E = derivative_eval_matrix(mesh, rule.nodes);
        Eigen::VectorXd folded(nq);
        for (int l = 0; l < nq; ++l)
            folded[l] = rule.weights[l] * term.kernel(rule.nodes[l]);
        if (term.linear)
            system.linear_rows.emplace_back(folded.transpose() * E);
        else
            system.linear_rows.emplace_back();
        system.eval_matrices.push_back(std::move(E));
        system.folded_weights.push_back(std::move(folded));
    }
    return system;
}

namespace {

Eigen::VectorXd term_integrals(const DiscretizedSystem& system, const Eigen::VectorXd& x) {
    const auto m = static_cast<Eigen::Index>(system.model.terms.size());
    Eigen::VectorXd J(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const IntegralTerm& term = system.model.terms[static_cast<size_t>(i)];
        double s;
        if (term.linear) {
            s = system.linear_rows[static_cast<size_t>(i)].dot(x);
        } else {
            const Eigen::VectorXd u = system.eval_matrices[static_cast<size_t>(i)] * x;
            const Eigen::VectorXd& w = system.folded_weights[static_cast<size_t>(i)];
            s = 0.0;
            for (Eigen::Index l = 0; l < u.size(); ++l) s += w[l] * term.inner(u[l]);
        }
        if (!std::isfinite(s))
            throw NumericError("non-finite integral in term " + std::to_string(i));
        J[i] = s;
    }
    return J;
}

}  // namespace

double birth_rate(const DiscretizedSystem& system, const Eigen::VectorXd& x) {
    return system.model.combiner(term_integrals(system, x));
}

Eigen::VectorXd rhs(const DiscretizedSystem& system, const Eigen::VectorXd& x) {
    const double F = birth_rate(system, x);
    Eigen::VectorXd out = system.mesh.diff_sub * x;
    out.array() -= F;
    return out;
}

Eigen::RowVectorXd gradient_row(const DiscretizedSystem& system,
                                const Eigen::VectorXd& x) {
    const Eigen::VectorXd J = term_integrals(system, x);
    const Eigen::VectorXd dG = system.model.combiner_gradient(J);
    Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(system.mesh.M);
    for (size_t i = 0; i < system.model.terms.size(); ++i) {
        const IntegralTerm& term = system.model.terms[i];
        const double di = dG[static_cast<Eigen::Index>(i)];
        if (term.linear) {
            g += di * system.linear_rows[i];
        } else {
            const Eigen::VectorXd u = system.eval_matrices[i] * x;
            Eigen::VectorXd w = system.folded_weights[i];
            for (Eigen::Index l = 0; l < u.size(); ++l) w[l] *= term.inner_derivative(u[l]);
            g += di * (w.transpose() * system.eval_matrices[i]);
        }
    }
    return g;
}

Eigen::MatrixXd jacobian(const DiscretizedSystem& system, const Eigen::VectorXd& x) {
    const Eigen::RowVectorXd g = gradient_row(system, x);
    Eigen::MatrixXd Jm = system.mesh.diff_sub;
    Jm.rowwise() -= g;
    return Jm;
}

Eigen::MatrixXd jacobian_fd(const DiscretizedSystem& system, const Eigen::VectorXd& x,
                            double step) {
    const int M = system.mesh.M;
    Eigen::MatrixXd Jm(M, M);
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < M; ++j) {
        const double h = step * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        Jm.col(j) = (rhs(system, xp) - rhs(system, xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return Jm;
}

Eigen::VectorXd equilibrium_lift(double b_bar, const ChebyshevMesh& mesh) {
    return b_bar * mesh.nodes.tail(mesh.M);
}

double equilibrium_project(const Eigen::VectorXd& x, const ChebyshevMesh& mesh) {
    if (x.size() != mesh.M)
        throw std::invalid_argument("equilibrium_project: state must have length M");
    const Eigen::VectorXd ratios =
        x.array() / mesh.nodes.tail(mesh.M).array();
    const double mean = ratios.mean();
    const double spread = (ratios.maxCoeff() - ratios.minCoeff()) /
                          std::max(std::abs(mean), 1e-300);
    if (spread > 1e-6)
        throw NotAnEquilibriumError(
            "equilibrium_project: node ratios are inconsistent (spread " +
                std::to_string(spread) + ")",
            spread);
    return mean;
}

double solve_equilibrium(const RenewalModel& model, double guess, double tol, int nq) {
    if (!std::isfinite(guess))
        throw std::invalid_argument("solve_equilibrium: guess must be finite");
    auto residual = [&](double b) { return b - evaluate_F_constant(model, b, nq); };

    double b = guess;
    double r = residual(b);
    for (int it = 0; it < 100; ++it) {
        if (std::abs(r) <= tol) return b;
        const double h = 1e-6 * std::max(1.0, std::abs(b));
        const double dr = (residual(b + h) - residual(b - h)) / (2.0 * h);
        if (dr == 0.0 || !std::isfinite(dr))
            throw IterationLimitError("solve_equilibrium: flat residual derivative", std::abs(r));
        double step = -r / dr;
        // damping: halve until the residual actually shrinks
        for (int half = 0; half < 40; ++half) {
            const double rn = residual(b + step);
            if (std::isfinite(rn) && std::abs(rn) < std::abs(r)) {
                b += step;
                r = rn;
                break;
            }
            step /= 2.0;
            if (half == 39)
                throw IterationLimitError("solve_equilibrium: damping failed", std::abs(r));
        }
    }
    if (std::abs(r) <= tol) return b;
    throw IterationLimitError("solve_equilibrium: no convergence in 100 iterations",
                              std::abs(r));
}

Eigen::VectorXd history_to_state(const std::function<double(double)>& phi,
                                 const ChebyshevMesh& mesh, int nq) {
    Eigen::VectorXd x(mesh.M);
    for (int j = 1; j <= mesh.M; ++j) {
        const QuadratureRule rule = quad_on_subinterval(mesh.nodes[j], 0.0, nq);
        double s = 0.0;
        for (Eigen::Index l = 0; l < rule.nodes.size(); ++l)
            s += rule.weights[l] * phi(rule.nodes[l]);
        x[j - 1] = -s;
    }
    return x;
}

double quadrature_refinement_error(const ChebyshevMesh& mesh, const RenewalModel& model,
                                   const Eigen::VectorXd& x, int nq) {
    const DiscretizedSystem coarse = build_system(mesh, model, nq);
    const DiscretizedSystem fine = build_system(mesh, model, 2 * nq);
    return std::abs(birth_rate(coarse, x) - birth_rate(fine, x));
}

}  // namespace renewal
