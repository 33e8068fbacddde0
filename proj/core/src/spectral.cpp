#include "renewal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "renewal/errors.hpp"

namespace renewal {

namespace {

void sort_descending(std::vector<std::complex<double>>& ev) {
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

}  // namespace

Spectrum matrix_spectrum(const Eigen::MatrixXd& A, SpectrumSource source) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericError("matrix_spectrum: eigensolver did not converge");
    Spectrum spec;
    spec.source = source;
    spec.eigenvalues.assign(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
    sort_descending(spec.eigenvalues);
    spec.rightmost = spec.eigenvalues.front();
    return spec;
}

Spectrum eigenvalues(const DiscretizedSystem& system, const Eigen::VectorXd& x_eq) {
    const double res = rhs(system, x_eq).cwiseAbs().maxCoeff();
    if (res > 1e-8 * (1.0 + x_eq.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(
            "eigenvalues: state is not an equilibrium (rhs residual " +
            std::to_string(res) + ")");
    return matrix_spectrum(jacobian(system, x_eq), SpectrumSource::jacobian);
}

CharFn char_true(const std::vector<IntegralTerm>& linear_terms, int n_per_interval) {
    struct Panel {
        Eigen::VectorXd nodes;
        Eigen::VectorXd folded;
    };
    auto panels = std::make_shared<std::vector<Panel>>();
    for (const IntegralTerm& term : linear_terms) {
        if (!term.linear)
            throw std::invalid_argument("char_true: terms must be linear");
        const QuadratureRule rule =
            quad_on_subinterval(term.support_lo, term.support_hi, n_per_interval);
        Panel p;
        p.nodes = rule.nodes;
        p.folded.resize(rule.nodes.size());
        for (Eigen::Index l = 0; l < rule.nodes.size(); ++l)
            p.folded[l] = rule.weights[l] * term.kernel(rule.nodes[l]);
        panels->push_back(std::move(p));
    }

    CharFn fn;
    fn.evaluate = [panels](std::complex<double> lambda) {
        std::complex<double> s = 0.0;
        for (const auto& p : *panels)
            for (Eigen::Index l = 0; l < p.nodes.size(); ++l)
                s += p.folded[l] * std::exp(lambda * p.nodes[l]);
        return 1.0 - s;
    };
    fn.derivative = [panels](std::complex<double> lambda) {
        std::complex<double> s = 0.0;
        for (const auto& p : *panels)
            for (Eigen::Index l = 0; l < p.nodes.size(); ++l)
                s += p.folded[l] * p.nodes[l] * std::exp(lambda * p.nodes[l]);
        return -s;
    };
    return fn;
}

std::complex<double> char_discrete(const Eigen::MatrixXd& D,
                                   const Eigen::RowVectorXd& K,
                                   std::complex<double> lambda, double* rcond_out) {
    const auto M = D.rows();
    Eigen::MatrixXcd shifted = -D.cast<std::complex<double>>();
    shifted.diagonal().array() += lambda;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
    const double rcond = lu.rcond();
    if (rcond_out) *rcond_out = rcond;
    if (!(rcond > 1e-12))
        throw NearPoleError(
            "char_discrete: lambda is too close to the spectrum of D; perturb lambda",
            rcond);
    const Eigen::VectorXcd y = lu.solve(-Eigen::VectorXcd::Ones(M));
    return 1.0 - (K.cast<std::complex<double>>() * y)(0);
}

Eigen::RowVectorXd kernel_row(const ChebyshevMesh& mesh,
                              const std::vector<IntegralTerm>& linear_terms, int nq) {
    if (nq == 0) nq = std::max(2 * mesh.M, 32);
    Eigen::RowVectorXd K = Eigen::RowVectorXd::Zero(mesh.M);
    for (const IntegralTerm& term : linear_terms) {
        if (!term.linear)
            throw std::invalid_argument("kernel_row: terms must be linear");
        const QuadratureRule rule =
            quad_on_subinterval(term.support_lo, term.support_hi, nq);
        const Eigen::MatrixXd E = derivative_eval_matrix(mesh, rule.nodes);
        Eigen::VectorXd folded(rule.nodes.size());
        for (Eigen::Index l = 0; l < rule.nodes.size(); ++l)
            folded[l] = rule.weights[l] * term.kernel(rule.nodes[l]);
        K += folded.transpose() * E;
    }
    return K;
}

std::complex<double> psi_lambda(std::complex<double> lambda, double theta) {
    if (std::abs(lambda) < 1e-8) {
        // series of (e^{lambda theta} - 1)/lambda around lambda = 0
        return theta * (1.0 + lambda * theta / 2.0 + lambda * lambda * theta * theta / 6.0);
    }
    return (std::exp(lambda * theta) - 1.0) / lambda;
}

RootSearch find_char_roots(const CharFn& f,
                           const std::vector<std::complex<double>>& seeds, double tol) {
    RootSearch out;
    for (std::complex<double> z : seeds) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("find_char_roots: seeds must be finite");
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const std::complex<double> fz = f.evaluate(z);
            if (std::abs(fz) <= tol) {
                converged = true;
                break;
            }
            const std::complex<double> dz = f.derivative(z);
            if (std::abs(dz) < 1e-300) break;
            z -= fz / dz;
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
        }
        if (!converged) {
            ++out.failed_seeds;
            continue;
        }
        const bool duplicate =
            std::any_of(out.roots.begin(), out.roots.end(),
                        [&](const auto& r) { return std::abs(r - z) <= 10.0 * tol; });
        if (!duplicate) out.roots.push_back(z);
    }
    return out;
}

std::vector<ConvergencePoint> convergence_study(const RenewalModel& model,
                                                double b_eq,
                                                const std::vector<int>& M_list,
                                                int reference_M, int nq) {
    for (int M : M_list)
        if (M > reference_M)
            throw std::invalid_argument("convergence_study: reference_M must be >= all M");

    auto rightmost_at = [&](int M, double* rcond) {
        const ChebyshevMesh mesh = build_mesh(M, model.tau);
        const DiscretizedSystem system = build_system(mesh, model, nq);
        const Spectrum spec = eigenvalues(system, equilibrium_lift(b_eq, mesh));
        if (rcond) {
            const Eigen::RowVectorXd K =
                kernel_row(mesh, linearize_at(model, b_eq), nq);
            try {
                char_discrete(mesh.diff_sub, K,
                              spec.rightmost * (1.0 + 1e-8) + 1e-8, rcond);
            } catch (const NearPoleError& e) {
                *rcond = e.rcond;
            }
        }
        return spec.rightmost;
    };

    const std::complex<double> ref = rightmost_at(reference_M, nullptr);
    std::vector<ConvergencePoint> table;
    table.reserve(M_list.size());
    for (int M : M_list) {
        ConvergencePoint p;
        p.M = M;
        p.error = std::abs(rightmost_at(M, &p.rcond) - ref);
        table.push_back(p);
    }
    return table;
}

}  // namespace renewal
