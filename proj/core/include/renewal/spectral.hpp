#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "renewal/model.hpp"
#include "renewal/system.hpp"

namespace renewal {

enum class SpectrumSource { jacobian, char_discrete, char_true };

/// A computed set of eigenvalues, sorted by descending real part with ties
/// broken by descending imaginary part (so +i member of a conjugate pair
/// comes first). `rightmost` duplicates the first entry.
struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    std::complex<double> rightmost;
    SpectrumSource source = SpectrumSource::jacobian;
};

/// Full spectrum of an arbitrary real matrix (dense QR eigensolver).
Spectrum matrix_spectrum(const Eigen::MatrixXd& A, SpectrumSource source);

/// Spectrum of the Jacobian at an equilibrium state. The state must satisfy
/// ||rhs||_inf < 1e-8 * (1 + ||x||_inf), else std::invalid_argument.
Spectrum eigenvalues(const DiscretizedSystem& system, const Eigen::VectorXd& x_eq);

/// A characteristic function and its derivative, holomorphic on the domain
/// of interest.
struct CharFn {
    std::function<std::complex<double>(std::complex<double>)> evaluate;
    std::function<std::complex<double>(std::complex<double>)> derivative;
};

/// Characteristic function 1 - int kernel(theta) e^{lambda theta} dtheta of a
/// linear rule given by kernel terms (inner transforms must be identity).
/// Integrals use a Fejer rule with n_per_interval nodes per term support.
CharFn char_true(const std::vector<IntegralTerm>& linear_terms,
                 int n_per_interval = 256);

/// Discrete characteristic value 1 - K (D - lambda I)^{-1} 1 via one complex
/// linear solve. If rcond_out is non-null it receives the reciprocal
/// condition estimate of (lambda I - D). Throws NearPoleError when the shift
/// is too close to an eigenvalue of D (rcond < 1e-12).
std::complex<double> char_discrete(const Eigen::MatrixXd& D,
                                   const Eigen::RowVectorXd& K,
                                   std::complex<double> lambda,
                                   double* rcond_out = nullptr);

/// Row vector K with K_j = int kernel(theta) l_j'(theta) dtheta summed over
/// the linear terms: the discretization of the linear rule.
Eigen::RowVectorXd kernel_row(const ChebyshevMesh& mesh,
                              const std::vector<IntegralTerm>& linear_terms,
                              int nq = 0);

/// (e^{lambda theta} - 1) / lambda, with the series branch at |lambda| < 1e-8
/// covering the removable singularity.
std::complex<double> psi_lambda(std::complex<double> lambda, double theta);

struct RootSearch {
    std::vector<std::complex<double>> roots;  ///< deduplicated converged roots
    int failed_seeds = 0;
};

/// Complex Newton iteration from each seed; converged roots (|f| <= tol)
/// deduplicated at mutual distance 10 * tol.
RootSearch find_char_roots(const CharFn& f,
                           const std::vector<std::complex<double>>& seeds,
                           double tol = 1e-12);

struct ConvergencePoint {
    int M;
    double error;        ///< |rightmost(M) - rightmost(reference_M)|
    double rcond = 1.0;  ///< condition diagnostic of the shifted solve at the root
};

/// Rightmost-eigenvalue error against a reference discretization, for the
/// model linearized at the equilibrium b_eq.
std::vector<ConvergencePoint> convergence_study(const RenewalModel& model,
                                                double b_eq,
                                                const std::vector<int>& M_list,
                                                int reference_M, int nq = 0);

}  // namespace renewal
