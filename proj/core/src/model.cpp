#include "renewal/model.hpp"

#include <cmath>
#include <stdexcept>

#include "renewal/mesh.hpp"

namespace renewal {

namespace {

double integrate_fn(const std::function<double(double)>& f, double a, double b, int n) {
    const QuadratureRule rule = quad_on_subinterval(a, b, n);
    double s = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * f(rule.nodes[i]);
    return s;
}

const std::function<double(double)> kIdentity = [](double u) { return u; };
const std::function<double(double)> kOne = [](double) { return 1.0; };

}  // namespace

RenewalModel sirs_model(double gamma, double m, double theta_shape) {
    if (!(gamma > 0.0)) throw std::invalid_argument("sirs_model: gamma must be > 0");
    if (!(m > 0.0) || !(theta_shape > 0.0))
        throw std::invalid_argument("sirs_model: m and theta_shape must be > 0");

    RenewalModel model;
    model.name = "sirs";
    model.tau = 1.0;
    model.params = {{"gamma", gamma}, {"m", m}, {"theta", theta_shape}};

    // normalizing constant: 1 / int_0^1 s^{m-1} e^{-s/theta} ds
    const double mass = integrate_fn(
        [m, theta_shape](double s) { return std::pow(s, m - 1.0) * std::exp(-s / theta_shape); },
        0.0, 1.0, 256);
    const double alpha = 1.0 / mass;

    IntegralTerm j1;
    j1.kernel = kOne;
    j1.support_lo = -1.0;
    j1.support_hi = 0.0;
    j1.inner = kIdentity;
    j1.inner_derivative = kOne;
    j1.linear = true;

    IntegralTerm j2;
    j2.kernel = [alpha, m, theta_shape](double theta) {
        return alpha * std::pow(-theta, m - 1.0) * std::exp(theta / theta_shape);
    };
    j2.support_lo = -1.0;
    j2.support_hi = 0.0;
    j2.inner = kIdentity;
    j2.inner_derivative = kOne;
    j2.linear = true;

    model.terms = {j1, j2};
    model.combiner = [gamma](const Eigen::VectorXd& J) {
        return gamma * (1.0 - J[0]) * J[1];
    };
    model.combiner_gradient = [gamma](const Eigen::VectorXd& J) {
        Eigen::VectorXd g(2);
        g[0] = -gamma * J[1];
        g[1] = gamma * (1.0 - J[0]);
        return g;
    };
    return model;
}

RenewalModel blowflies_model(double beta0, double mu, double c, double tau_trunc) {
    if (!(beta0 > 0.0)) throw std::invalid_argument("blowflies_model: beta0 must be > 0");
    if (!(mu > 0.0)) throw std::invalid_argument("blowflies_model: mu must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("blowflies_model: c must be > 0");
    if (!(tau_trunc > 1.0)) throw std::invalid_argument("blowflies_model: tau must be > 1");

    RenewalModel model;
    model.name = "blowflies";
    model.tau = tau_trunc;
    model.params = {{"beta0", beta0}, {"mu", mu}, {"c", c}, {"tau", tau_trunc}};

    IntegralTerm j;
    j.kernel = [mu](double theta) { return std::exp(mu * theta); };
    j.support_lo = -tau_trunc;
    j.support_hi = -1.0;
    j.inner = kIdentity;
    j.inner_derivative = kOne;
    j.linear = true;

    model.terms = {j};
    model.combiner = [beta0, c](const Eigen::VectorXd& J) {
        return beta0 * J[0] * std::exp(-c * J[0]);
    };
    model.combiner_gradient = [beta0, c](const Eigen::VectorXd& J) {
        Eigen::VectorXd g(1);
        g[0] = beta0 * std::exp(-c * J[0]) * (1.0 - c * J[0]);
        return g;
    };
    return model;
}

RenewalModel cannibalism_model(double gamma, double tau) {
    if (!(gamma > 0.0)) throw std::invalid_argument("cannibalism_model: gamma must be > 0");
    if (!(tau > 1.0)) throw std::invalid_argument("cannibalism_model: tau must be > 1");

    RenewalModel model;
    model.name = "cannibalism";
    model.tau = tau;
    model.params = {{"gamma", gamma}, {"tau", tau}};

    IntegralTerm j;
    j.kernel = [gamma](double) { return gamma / 2.0; };
    j.support_lo = -tau;
    j.support_hi = -1.0;
    j.inner = [](double u) { return u * std::exp(-u); };
    j.inner_derivative = [](double u) { return (1.0 - u) * std::exp(-u); };
    j.linear = false;

    model.terms = {j};
    model.combiner = [](const Eigen::VectorXd& J) { return J[0]; };
    model.combiner_gradient = [](const Eigen::VectorXd&) {
        return Eigen::VectorXd::Ones(1).eval();
    };
    return model;
}

RenewalModel constant_kernel_model(double gamma, double tau) {
    if (!(gamma > 0.0)) throw std::invalid_argument("constant_kernel_model: gamma must be > 0");
    if (!(tau > 0.0)) throw std::invalid_argument("constant_kernel_model: tau must be > 0");

    RenewalModel model;
    model.name = "linear";
    model.tau = tau;
    model.params = {{"gamma", gamma}, {"tau", tau}};

    IntegralTerm j;
    j.kernel = [gamma](double) { return gamma; };
    j.support_lo = -tau;
    j.support_hi = 0.0;
    j.inner = kIdentity;
    j.inner_derivative = kOne;
    j.linear = true;

    model.terms = {j};
    model.combiner = [](const Eigen::VectorXd& J) { return J[0]; };
    model.combiner_gradient = [](const Eigen::VectorXd&) {
        return Eigen::VectorXd::Ones(1).eval();
    };
    return model;
}

double evaluate_F(const RenewalModel& model,
                  const std::function<double(double)>& history, int nq) {
    Eigen::VectorXd J(static_cast<Eigen::Index>(model.terms.size()));
    for (size_t i = 0; i < model.terms.size(); ++i) {
        const IntegralTerm& term = model.terms[i];
        const QuadratureRule rule =
            quad_on_subinterval(term.support_lo, term.support_hi, nq);
        double s = 0.0;
        for (Eigen::Index l = 0; l < rule.nodes.size(); ++l) {
            const double t = rule.nodes[l];
            s += rule.weights[l] * term.kernel(t) * term.inner(history(t));
        }
        J[static_cast<Eigen::Index>(i)] = s;
    }
    return model.combiner(J);
}

double evaluate_F_constant(const RenewalModel& model, double b, int nq) {
    return evaluate_F(model, [b](double) { return b; }, nq);
}

std::vector<IntegralTerm> linearize_at(const RenewalModel& model, double b_bar,
                                       int nq) {
    Eigen::VectorXd J(static_cast<Eigen::Index>(model.terms.size()));
    for (size_t i = 0; i < model.terms.size(); ++i) {
        const IntegralTerm& term = model.terms[i];
        const double hb = term.inner(b_bar);
        J[static_cast<Eigen::Index>(i)] =
            integrate_fn(term.kernel, term.support_lo, term.support_hi, nq) * hb;
    }
    const Eigen::VectorXd dG = model.combiner_gradient(J);

    std::vector<IntegralTerm> lin;
    lin.reserve(model.terms.size());
    for (size_t i = 0; i < model.terms.size(); ++i) {
        const IntegralTerm& term = model.terms[i];
        const double scale = dG[static_cast<Eigen::Index>(i)] * term.inner_derivative(b_bar);
        IntegralTerm t;
        t.kernel = [scale, kernel = term.kernel](double theta) { return scale * kernel(theta); };
        t.support_lo = term.support_lo;
        t.support_hi = term.support_hi;
        t.inner = kIdentity;
        t.inner_derivative = kOne;
        t.linear = true;
        lin.push_back(std::move(t));
    }
    return lin;
}

namespace {

double take(const std::map<std::string, double>& params, const std::string& key,
            double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

double take_maybe_log(const std::map<std::string, double>& params,
                      const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it != params.end()) return it->second;
    auto lg = params.find("log_" + key);
    if (lg != params.end()) return std::exp(lg->second);
    return fallback;
}

}  // namespace

RenewalModel build_model(const std::string& kind,
                         const std::map<std::string, double>& params) {
    if (kind == "sirs") {
        return sirs_model(take_maybe_log(params, "gamma", 2.0),
                          take(params, "m", 3.0), take(params, "theta", 0.1));
    }
    if (kind == "blowflies") {
        return blowflies_model(take_maybe_log(params, "beta0", 1500.0),
                               take(params, "mu", 4.0), take(params, "c", 100.0),
                               take(params, "tau", 10.0));
    }
    if (kind == "cannibalism") {
        return cannibalism_model(take_maybe_log(params, "gamma", std::exp(2.0)),
                                 take(params, "tau", 3.0));
    }
    if (kind == "linear") {
        return constant_kernel_model(take_maybe_log(params, "gamma", 0.25),
                                     take(params, "tau", 2.0));
    }
    throw std::invalid_argument("build_model: unknown model kind '" + kind + "'");
}

namespace {

bool known_param(const std::string& kind, const std::string& name) {
    auto base = name.rfind("log_", 0) == 0 ? name.substr(4) : name;
    if (kind == "sirs") return base == "gamma" || base == "m" || base == "theta";
    if (kind == "blowflies")
        return base == "beta0" || base == "mu" || base == "c" || base == "tau";
    if (kind == "cannibalism" || kind == "linear")
        return base == "gamma" || base == "tau";
    return false;
}

}  // namespace

ModelFamily make_family(const std::string& kind,
                        std::map<std::string, double> params,
                        const std::string& active_param, double from, double to) {
    if (!known_param(kind, active_param))
        throw std::invalid_argument("make_family: parameter '" + active_param +
                                    "' does not exist for model '" + kind + "'");
    // the active parameter must win over any pinned alias of itself
    if (active_param.rfind("log_", 0) == 0)
        params.erase(active_param.substr(4));
    else
        params.erase("log_" + active_param);

    ModelFamily family;
    family.param = active_param;
    family.from = from;
    family.to = to;
    family.at = [kind, params = std::move(params), active_param](double value) {
        auto p = params;
        p[active_param] = value;
        return build_model(kind, p);
    };
    family.at(from);  // surface bad pinned parameters early
    return family;
}

}  // namespace renewal
