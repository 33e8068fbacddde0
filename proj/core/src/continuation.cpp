#include "renewal/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "renewal/errors.hpp"
#include "renewal/system.hpp"

namespace renewal {

namespace {

BranchPoint evaluate_point(const ModelFamily& family, const ChebyshevMesh& mesh,
                           double param, double b, int nq) {
    BranchPoint pt;
    pt.param = param;
    pt.b_eq = b;
    pt.x_eq = equilibrium_lift(b, mesh);
    const RenewalModel model = family.at(param);
    const DiscretizedSystem system = build_system(mesh, model, nq);
    const Spectrum spec = eigenvalues(system, pt.x_eq);
    pt.rightmost = spec.rightmost;
    pt.stable = spec.rightmost.real() < 0.0;
    return pt;
}

}  // namespace

namespace {

// db/dp along the branch from the implicit relation b = F_p(b); falls back
// to a flat predictor when the branch is near-singular (a crossing point)
double branch_slope(const ModelFamily& family, double p, double b) {
    auto res = [&family](double pp, double bb) {
        return bb - evaluate_F_constant(family.at(pp), bb);
    };
    const double hp = 1e-6 * std::max(1.0, std::abs(p));
    const double hb = 1e-6 * std::max(1.0, std::abs(b));
    const double drdp = (res(p + hp, b) - res(p - hp, b)) / (2.0 * hp);
    const double drdb = (res(p, b + hb) - res(p, b - hb)) / (2.0 * hb);
    if (!std::isfinite(drdp) || !std::isfinite(drdb) || std::abs(drdb) < 1e-10)
        return 0.0;
    const double slope = -drdp / drdb;
    return std::isfinite(slope) ? slope : 0.0;
}

}  // namespace

Branch continue_equilibria(const ModelFamily& family, const ChebyshevMesh& mesh,
                           double start_b, int n_points, int nq) {
    if (n_points < 1)
        throw std::invalid_argument("continue_equilibria: n_points must be >= 1");

    Branch branch;
    double b = solve_equilibrium(family.at(family.from), start_b);
    branch.points.push_back(evaluate_point(family, mesh, family.from, b, nq));
    if (n_points == 1) return branch;

    double p = family.from;
    double slope = branch_slope(family, p, b);
    for (int i = 1; i < n_points; ++i) {
        const double target =
            family.from + (family.to - family.from) * i / (n_points - 1.0);
        // walk toward the target with a tangent/secant predictor, halving the
        // parameter step when the corrector fails to converge
        int halvings = 0;
        while (p != target) {
            double step = target - p;
            for (double scale = 1.0; ; scale /= 2.0, ++halvings) {
                if (halvings > 8) {
                    branch.complete = false;
                    branch.termination_reason =
                        "corrector failed near param " + std::to_string(p + step);
                    return branch;
                }
                try {
                    const double p_try = (scale == 1.0) ? target : p + step * scale;
                    const double predictor = b + slope * (p_try - p);
                    const double b_try = solve_equilibrium(family.at(p_try), predictor);
                    if (std::abs(p_try - p) > 1e-12 * std::max(1.0, std::abs(p)))
                        slope = (b_try - b) / (p_try - p);
                    p = p_try;
                    b = b_try;
                    break;
                } catch (const NumericError&) {
                    continue;
                }
            }
        }
        branch.points.push_back(evaluate_point(family, mesh, target, b, nq));
    }
    return branch;
}

std::vector<BifurcationPoint> detect_bifurcations(const Branch& branch,
                                                  const ModelFamily& family,
                                                  const ChebyshevMesh& mesh, int nq,
                                                  double tol) {
    std::vector<BifurcationPoint> found;
    if (branch.points.size() < 2) return found;

    for (size_t i = 0; i + 1 < branch.points.size(); ++i) {
        const BranchPoint& lo = branch.points[i];
        const BranchPoint& hi = branch.points[i + 1];
        const double g_lo = lo.rightmost.real();
        const double g_hi = hi.rightmost.real();
        if (!(g_lo * g_hi < 0.0)) continue;

        // safeguarded secant on param -> Re(rightmost) inside [lo, hi]
        double pa = lo.param, ga = g_lo, ba = lo.b_eq;
        double pb = hi.param, gb = g_hi;
        double p_best = std::abs(ga) < std::abs(gb) ? pa : pb;
        BranchPoint best = std::abs(ga) < std::abs(gb) ? lo : hi;
        bool refined = false;
        for (int it = 0; it < 60; ++it) {
            double p_next = pb - gb * (pb - pa) / (gb - ga);
            const double lo_p = std::min(pa, pb), hi_p = std::max(pa, pb);
            if (!(p_next > lo_p) || !(p_next < hi_p)) p_next = 0.5 * (pa + pb);
            BranchPoint probe;
            try {
                const double b_next = solve_equilibrium(family.at(p_next), ba);
                probe = evaluate_point(family, mesh, p_next, b_next, nq);
            } catch (const NumericError&) {
                break;
            }
            const double g_next = probe.rightmost.real();
            if (std::abs(g_next) < std::abs(best.rightmost.real())) {
                best = probe;
                p_best = p_next;
            }
            if (std::abs(g_next) <= tol) {
                refined = true;
                break;
            }
            // keep a sign-changing bracket
            if (ga * g_next < 0.0) {
                pb = p_next;
                gb = g_next;
            } else {
                pa = p_next;
                ga = g_next;
            }
            ba = probe.b_eq;
        }

        BifurcationPoint bif;
        bif.param = p_best;
        bif.b_eq = best.b_eq;
        bif.eigenvalue = best.rightmost;
        bif.refinement_residual = std::abs(best.rightmost.real());
        bif.refined = refined;
        bif.kind = std::abs(best.rightmost.imag()) > 1e-4 ? BifurcationKind::hopf
                                                          : BifurcationKind::zero_crossing;
        found.push_back(bif);
    }
    return found;
}

void apply_flags(Branch& branch, const std::vector<BifurcationPoint>& bifurcations) {
    for (const BifurcationPoint& bif : bifurcations) {
        const unsigned flag = bif.kind == BifurcationKind::hopf
                                  ? kFlagHopf
                                  : (kFlagFold | kFlagTranscriticalCandidate);
        for (size_t i = 0; i + 1 < branch.points.size(); ++i) {
            const double a = branch.points[i].param;
            const double b = branch.points[i + 1].param;
            if ((a <= bif.param && bif.param <= b) || (b <= bif.param && bif.param <= a)) {
                branch.points[i].flags |= flag;
                branch.points[i + 1].flags |= flag;
                break;
            }
        }
    }
}

std::vector<HopfCurvePoint> hopf_curve(
    const std::function<ModelFamily(double)>& family_at,
    const std::vector<double>& grid,
    const std::function<double(double)>& start_b_at, const ChebyshevMesh& mesh,
    int n_points, int nq, int n_threads) {
    std::vector<HopfCurvePoint> curve(grid.size());

    auto run_one = [&](size_t i) {
        HopfCurvePoint& point = curve[i];
        point.param2 = grid[i];
        try {
            const ModelFamily family = family_at(grid[i]);
            const Branch branch =
                continue_equilibria(family, mesh, start_b_at(grid[i]), n_points, nq);
            const auto bifs = detect_bifurcations(branch, family, mesh, nq);
            for (const BifurcationPoint& bif : bifs) {
                if (bif.kind == BifurcationKind::hopf) {
                    point.found = true;
                    point.hopf_param1 = bif.param;
                    break;
                }
            }
            if (!point.found) point.note = "no hopf detected";
            if (!branch.complete)
                point.note += (point.note.empty() ? "" : "; ") + branch.termination_reason;
        } catch (const std::exception& e) {
            point.found = false;
            point.note = e.what();
        }
    };

    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(grid.size())));
    if (n_threads == 1) {
        for (size_t i = 0; i < grid.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w) {
            workers.emplace_back([&, w] {
                for (size_t i = static_cast<size_t>(w); i < grid.size();
                     i += static_cast<size_t>(n_threads))
                    run_one(i);
            });
        }
        for (auto& worker : workers) worker.join();
    }
    return curve;
}

}  // namespace renewal
