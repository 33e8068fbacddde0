#include "renewal/legacy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "renewal/errors.hpp"
#include "renewal/system.hpp"

namespace renewal {

LegacySystem build_legacy_system(const ChebyshevMesh& mesh, const RenewalModel& model,
                                 int nq) {
    if (std::abs(model.tau - mesh.tau) > 1e-12 * std::max(1.0, mesh.tau))
        throw std::invalid_argument("build_legacy_system: model.tau does not match mesh.tau");
    if (nq == 0) nq = std::max(2 * mesh.M, 32);

    LegacySystem system;
    system.mesh = mesh;
    system.model = model;
    system.nq = nq;
    for (const IntegralTerm& term : model.terms) {
        const QuadratureRule rule =
            quad_on_subinterval(term.support_lo, term.support_hi, nq);
        system.eval_full.push_back(barycentric_matrix(mesh.nodes, mesh.bary_weights,
                                                      rule.nodes, 1e-14 * mesh.tau));
        Eigen::VectorXd folded(nq);
        for (int l = 0; l < nq; ++l)
            folded[l] = rule.weights[l] * term.kernel(rule.nodes[l]);
        system.folded.push_back(std::move(folded));
    }
    return system;
}

namespace {

// F evaluated on the interpolant through the full nodal vector (y0, y).
double legacy_F(const LegacySystem& system, const Eigen::VectorXd& full) {
    const auto m = static_cast<Eigen::Index>(system.model.terms.size());
    Eigen::VectorXd J(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const IntegralTerm& term = system.model.terms[static_cast<size_t>(i)];
        const Eigen::VectorXd u = system.eval_full[static_cast<size_t>(i)] * full;
        const Eigen::VectorXd& w = system.folded[static_cast<size_t>(i)];
        double s = 0.0;
        for (Eigen::Index l = 0; l < u.size(); ++l) s += w[l] * term.inner(u[l]);
        if (!std::isfinite(s))
            throw NumericError("legacy_F: non-finite integral in term " + std::to_string(i));
        J[i] = s;
    }
    return system.model.combiner(J);
}

}  // namespace

double legacy_closure(const LegacySystem& system, const Eigen::VectorXd& y) {
    if (y.size() != system.mesh.M)
        throw std::invalid_argument("legacy_closure: state must have length M");

    Eigen::VectorXd full(system.mesh.M + 1);
    full.tail(system.mesh.M) = y;

    // an overflowing excursion of the iterate counts as a rejected step, so
    // the residual maps it to infinity instead of propagating the failure
    auto residual = [&](double y0) {
        full[0] = y0;
        try {
            return y0 - legacy_F(system, full);
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double y0 = y[0];  // nearest node value as the starting guess
    double r = residual(y0);
    for (int it = 0; it < system.inner_max_iter; ++it) {
        ++system.inner_iterations;
        if (std::abs(r) <= system.inner_tol) return y0;
        const double h = 1e-7 * std::max(1.0, std::abs(y0));
        const double dr = (residual(y0 + h) - residual(y0 - h)) / (2.0 * h);
        if (dr == 0.0 || !std::isfinite(dr))
            throw NumericError("legacy_closure: flat residual derivative");
        double step = -r / dr;
        bool advanced = false;
        for (int half = 0; half < 40; ++half) {
            const double rn = residual(y0 + step);
            if (std::isfinite(rn) && std::abs(rn) < std::abs(r)) {
                y0 += step;
                r = rn;
                advanced = true;
                break;
            }
            step /= 2.0;
        }
        if (!advanced) throw NumericError("legacy_closure: damping failed");
    }
    if (std::abs(r) <= system.inner_tol) return y0;
    throw NumericError("legacy_closure: inner solve did not converge (residual " +
                       std::to_string(std::abs(r)) + ")");
}

Eigen::VectorXd legacy_rhs(const LegacySystem& system, const Eigen::VectorXd& y) {
    Eigen::VectorXd full(system.mesh.M + 1);
    full[0] = legacy_closure(system, y);
    full.tail(system.mesh.M) = y;
    return system.mesh.diff_full.bottomRows(system.mesh.M) * full;
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// median per-call seconds of fn over states drawn by draw(); each sample is
// batched so the clock resolution does not dominate
template <typename Fn, typename Draw>
double time_per_call(const Fn& fn, const Draw& draw, int n_samples) {
    volatile double sink = 0.0;

    // calibrate a batch size worth ~50us
    int batch = 1;
    {
        const Eigen::VectorXd state = draw();
        for (;;) {
            const auto start = Clock::now();
            for (int k = 0; k < batch; ++k) sink = sink + fn(state);
            const double secs = std::chrono::duration<double>(Clock::now() - start).count();
            if (secs > 50e-6 || batch > (1 << 20)) break;
            batch *= 2;
        }
    }

    std::vector<double> samples;
    samples.reserve(static_cast<size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        const Eigen::VectorXd state = draw();
        const auto start = Clock::now();
        for (int k = 0; k < batch; ++k) sink = sink + fn(state);
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        samples.push_back(secs / batch);
    }
    (void)sink;
    return median(samples);
}

// natural-parameter equilibrium continuation with a full-dimension Newton
// corrector; the Jacobian comes from forward differences of the method's
// right-hand side, so both methods run through the same code path. make_rhs
// assembles the system once per parameter value (amortized over the
// corrector's many evaluations, as in continuation packages).
template <typename MakeRhs>
double time_continuation(const MakeRhs& make_rhs, Eigen::VectorXd x, double from,
                         double to, int n_points) {
    const auto n = x.size();
    const auto start = Clock::now();
    for (int i = 0; i < n_points; ++i) {
        const double p = from + (to - from) * i / std::max(1, n_points - 1);
        const auto rhs_at = make_rhs(p);
        Eigen::VectorXd r = rhs_at(x);
        for (int it = 0; it < 25; ++it) {
            if (r.cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + x.cwiseAbs().maxCoeff())) break;
            Eigen::MatrixXd J(n, n);
            for (Eigen::Index j = 0; j < n; ++j) {
                const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
                Eigen::VectorXd xp = x;
                xp[j] += h;
                J.col(j) = (rhs_at(xp) - r) / h;
            }
            x += J.partialPivLu().solve(-r);
            r = rhs_at(x);
        }
    }
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<BenchRow> bench_compare(const ModelFamily& family, double b_ref,
                                    const std::vector<int>& M_list, int n_rhs_evals,
                                    int n_continuation_points, std::uint64_t seed) {
    if (n_rhs_evals < 1)
        throw std::invalid_argument("bench_compare: n_rhs_evals must be >= 1");

    std::vector<BenchRow> rows;
    const double p_mid = 0.5 * (family.from + family.to);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * b_ref);

    for (int M : M_list) {
        const RenewalModel model_mid = family.at(p_mid);
        const ChebyshevMesh mesh = build_mesh(M, model_mid.tau);
        const DiscretizedSystem current = build_system(mesh, model_mid);
        const LegacySystem legacy = build_legacy_system(mesh, model_mid);

        // map nodal history values to the integrated state, so both methods
        // see the same bounded random histories in their own representation:
        // x_j = -int_{theta_j}^0 of the interior interpolant of the values
        Eigen::MatrixXd value_to_state(M, M);
        for (int j = 1; j <= M; ++j) {
            const QuadratureRule rule = quad_on_subinterval(mesh.nodes[j], 0.0, legacy.nq);
            const Eigen::MatrixXd B = barycentric_matrix(
                mesh.nodes.tail(M), mesh.bary_weights_sub, rule.nodes, 1e-14 * mesh.tau);
            value_to_state.row(j - 1) = -rule.weights.transpose() * B;
        }

        // the inner closure equation has no real root for some nodal data, so
        // legacy states are sampled from the same uniform law conditioned on
        // solvability; draws happen outside the timed sections
        auto draw_raw = [&rng, &uniform, M]() {
            Eigen::VectorXd v(M);
            for (int j = 0; j < M; ++j) v[j] = uniform(rng);
            return v;
        };
        auto draw_values = [&draw_raw, &legacy]() {
            for (int attempt = 0; attempt < 1000; ++attempt) {
                Eigen::VectorXd v = draw_raw();
                try {
                    legacy_closure(legacy, v);
                    return v;
                } catch (const NumericError&) {
                    continue;
                }
            }
            throw NumericError("bench_compare: no closure-solvable state in 1000 draws");
        };
        auto draw_states = [&draw_raw, &value_to_state]() {
            return (value_to_state * draw_raw()).eval();
        };

        BenchRow row;
        row.M = M;
        row.low_confidence = n_rhs_evals < 5;

        row.current_rhs_seconds = time_per_call(
            [&current](const Eigen::VectorXd& x) { return rhs(current, x).sum(); },
            draw_states, n_rhs_evals);

        legacy.inner_iterations = 0;
        long legacy_calls = 0;
        row.legacy_rhs_seconds = time_per_call(
            [&legacy, &legacy_calls](const Eigen::VectorXd& y) {
                ++legacy_calls;
                return legacy_rhs(legacy, y).sum();
            },
            draw_values, n_rhs_evals);
        row.inner_iterations_per_rhs =
            legacy_calls > 0 ? double(legacy.inner_iterations) / double(legacy_calls) : 0.0;
        row.rhs_ratio = row.legacy_rhs_seconds / row.current_rhs_seconds;

        // continuation timing, each method from its own exact equilibrium;
        // best of three sweeps to shed scheduling noise
        const double b_from = solve_equilibrium(family.at(family.from), b_ref);
        auto best_of = [&](auto&& make_rhs, const Eigen::VectorXd& x0) {
            double best = std::numeric_limits<double>::infinity();
            for (int rep = 0; rep < 3; ++rep)
                best = std::min(best, time_continuation(make_rhs, x0, family.from,
                                                        family.to, n_continuation_points));
            return best;
        };
        row.current_continuation_seconds = best_of(
            [&family, &mesh](double p) {
                return [system = build_system(mesh, family.at(p))](const Eigen::VectorXd& x) {
                    return rhs(system, x);
                };
            },
            equilibrium_lift(b_from, mesh));
        row.legacy_continuation_seconds = best_of(
            [&family, &mesh](double p) {
                return [system = build_legacy_system(mesh, family.at(p))](const Eigen::VectorXd& y) {
                    return legacy_rhs(system, y);
                };
            },
            Eigen::VectorXd::Constant(M, b_from).eval());
        row.continuation_ratio =
            row.legacy_continuation_seconds / row.current_continuation_seconds;

        rows.push_back(row);
    }
    return rows;
}

}  // namespace renewal
