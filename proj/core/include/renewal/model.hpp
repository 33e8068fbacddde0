#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace renewal {

/// One weighted integral J = int_a^b kernel(theta) * inner(phi(theta)) dtheta
/// over a sub-interval of the history domain [-tau, 0].
struct IntegralTerm {
    std::function<double(double)> kernel;  ///< kappa(theta) on [support_lo, support_hi]
    double support_lo = 0.0;
    double support_hi = 0.0;
    std::function<double(double)> inner;             ///< pointwise transform h
    std::function<double(double)> inner_derivative;  ///< h'
    bool linear = true;                              ///< h is the identity
};

/// A scalar renewal rule b(t) = F(b_t) in canonical form
/// F(phi) = G(J_1, ..., J_m). The nonlinearity may sit inside the integrals
/// (inner) or outside (combiner); Jacobians stay analytic via the chain rule.
struct RenewalModel {
    double tau = 0.0;
    std::vector<IntegralTerm> terms;
    std::function<double(const Eigen::VectorXd&)> combiner;                  ///< G(J)
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> combiner_gradient;///< dG/dJ
    std::map<std::string, double> params;
    std::string name;
};

/// SIRS epidemic rule on tau = 1: F(phi) = gamma * (1 - J1) * J2 with J1 the
/// plain integral of the history and J2 the integral against a normalized
/// Gamma-type kernel k(s) = alpha s^{m-1} e^{-s/theta_shape} truncated to
/// [0, 1]. alpha is computed by quadrature at construction.
RenewalModel sirs_model(double gamma, double m = 3.0, double theta_shape = 0.1);

/// Nicholson blowflies rule, infinite delay truncated at tau_trunc:
/// F(phi) = beta0 * J * e^{-c J}, J = int_{-tau}^{-1} e^{mu theta} phi(theta) dtheta.
RenewalModel blowflies_model(double beta0, double mu, double c = 100.0,
                             double tau_trunc = 10.0);

/// Cannibalism rule: F(phi) = (gamma/2) int_{-tau}^{-1} phi e^{-phi} dtheta.
RenewalModel cannibalism_model(double gamma, double tau);

/// Linear rule with constant kernel: F(phi) = gamma int_{-tau}^{0} phi dtheta.
RenewalModel constant_kernel_model(double gamma, double tau);

/// Evaluate F on an arbitrary history function, each integral by a Fejer rule
/// with nq nodes on the term's support.
double evaluate_F(const RenewalModel& model,
                  const std::function<double(double)>& history, int nq = 64);

/// F on the constant history phi == b.
double evaluate_F_constant(const RenewalModel& model, double b, int nq = 256);

/// Linear terms of the Frechet derivative DF(b_bar): term i keeps its kernel
/// scaled by dG/dJ_i(Jbar) * h_i'(b_bar), with the inner transform dropped.
std::vector<IntegralTerm> linearize_at(const RenewalModel& model, double b_bar,
                                       int nq = 256);

/// Build a named model from a parameter map. Kinds: "sirs", "blowflies",
/// "cannibalism", "linear". Keys "log_gamma" / "log_beta0" are accepted in
/// place of "gamma" / "beta0". Unknown kind throws std::invalid_argument.
RenewalModel build_model(const std::string& kind,
                         const std::map<std::string, double>& params);

/// A one-parameter slice through a model's parameter space, for continuation.
struct ModelFamily {
    std::function<RenewalModel(double)> at;  ///< rebuild the model at a value
    std::string param;                       ///< active parameter name
    double from = 0.0;
    double to = 0.0;
};

/// Family varying `active_param` (must be a key build_model accepts for the
/// kind) with all other parameters pinned.
ModelFamily make_family(const std::string& kind,
                        std::map<std::string, double> params,
                        const std::string& active_param, double from, double to);

}  // namespace renewal
