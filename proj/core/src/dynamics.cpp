#include "renewal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "renewal/errors.hpp"

namespace renewal {

namespace {

// Dormand-Prince 5(4) coefficients (FSAL).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
using StepCallback =
    std::function<void(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// Adaptive integration from t0 to t1 (t1 > t0); invokes on_step at the
// initial point and after every accepted step with (t, x, f(t,x)).
void integrate_adaptive(const Rhs& f, Eigen::VectorXd x, double t0, double t1,
                        double rtol, double atol, const StepCallback& on_step) {
    const auto n = x.size();
    double t = t0;
    Eigen::VectorXd k1 = f(t, x);
    on_step(t, x, k1);

    // initial step from the scale of x and f
    double h = 1e-4 * (t1 - t0);
    {
        const double dx = x.norm() + atol;
        const double df = k1.norm() + atol;
        if (df > 0.0) h = std::min(h, 0.01 * dx / df);
        h = std::max(h, 1e-10 * (t1 - t0));
    }

    Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), xn(n), err(n);

    // a trial stage at an oversized step can overflow the nonlinearity; that
    // counts as a rejected step, not a failure of the integration
    bool stage_ok = true;
    auto stage = [&](Eigen::VectorXd& out, double tt, const Eigen::VectorXd& yy) {
        if (!stage_ok) return;
        if (!yy.allFinite()) { stage_ok = false; return; }
        try {
            out = f(tt, yy);
        } catch (const NumericError&) {
            stage_ok = false;
            return;
        }
        if (!out.allFinite()) stage_ok = false;
    };

    long steps = 0;
    while (t < t1) {
        if (++steps > 20'000'000)
            throw NumericError("integrate: step budget exhausted at t=" + std::to_string(t));
        h = std::min(h, t1 - t);
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
            throw NumericError("integrate: step size underflow at t=" + std::to_string(t));

        stage_ok = true;
        stage(k2, t + h / 5.0, x + h * (a21 * k1));
        stage(k3, t + 3.0 * h / 10.0, x + h * (a31 * k1 + a32 * k2));
        stage(k4, t + 4.0 * h / 5.0, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        stage(k5, t + 8.0 * h / 9.0, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        stage(k6, t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        if (stage_ok) {
            xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            stage(k7, t + h, xn);
        }
        if (!stage_ok) {
            h *= 0.2;
            continue;
        }
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double norm2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(xn[i]));
            const double q = err[i] / sc;
            norm2 += q * q;
        }
        const double enorm = std::sqrt(norm2 / static_cast<double>(n));

        if (enorm <= 1.0) {
            t += h;
            x.swap(xn);
            k1.swap(k7);
            on_step(t, x, k1);
        }
        const double factor =
            enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
        h *= factor;
    }
}

}  // namespace

Trajectory integrate(const DiscretizedSystem& system, const Eigen::VectorXd& x0,
                     double t_end, double rtol, double atol) {
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be > 0");
    Trajectory traj;
    integrate_adaptive(
        [&system](double, const Eigen::VectorXd& x) { return rhs(system, x); }, x0,
        0.0, t_end, rtol, atol,
        [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
            traj.times.push_back(t);
            traj.states.push_back(x);
            traj.derivs.push_back(dx);
            traj.b_values.push_back(birth_rate(system, x));
        });
    return traj;
}

Eigen::VectorXd sample_state(const Trajectory& traj, double t) {
    if (traj.times.empty()) throw std::invalid_argument("sample_state: empty trajectory");
    if (t <= traj.times.front()) return traj.states.front();
    if (t >= traj.times.back()) return traj.states.back();
    const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    const auto i = static_cast<size_t>(it - traj.times.begin()) - 1;
    const double h = traj.times[i + 1] - traj.times[i];
    const double s = (t - traj.times[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * traj.states[i] + h10 * h * traj.derivs[i] + h01 * traj.states[i + 1] +
           h11 * h * traj.derivs[i + 1];
}

OrbitSummary extract_orbit(const DiscretizedSystem& system, const Trajectory& traj,
                           double transient_fraction) {
    if (traj.times.size() < 4)
        throw NotPeriodicError("extract_orbit: trajectory too short");
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw std::invalid_argument("extract_orbit: transient_fraction must be in [0,1)");

    const double t0 = traj.times.front() +
                      transient_fraction * (traj.times.back() - traj.times.front());
    size_t i0 = 0;
    while (i0 < traj.times.size() && traj.times[i0] < t0) ++i0;
    if (i0 + 3 > traj.times.size())
        throw NotPeriodicError("extract_orbit: no post-transient samples");

    // time-weighted tail mean of b
    double area = 0.0, span = 0.0;
    for (size_t i = i0; i + 1 < traj.times.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        area += 0.5 * (traj.b_values[i] + traj.b_values[i + 1]) * dt;
        span += dt;
    }
    const double mean = area / span;

    double tail_max = traj.b_values[i0], tail_min = traj.b_values[i0];
    for (size_t i = i0; i < traj.b_values.size(); ++i) {
        tail_max = std::max(tail_max, traj.b_values[i]);
        tail_min = std::min(tail_min, traj.b_values[i]);
    }
    if (tail_max - tail_min < 1e-8 * std::max(1.0, std::abs(mean)))
        throw NotPeriodicError("extract_orbit: signal is flat in the tail");

    auto b_at = [&](double t) { return birth_rate(system, sample_state(traj, t)); };

    std::vector<double> crossings;
    for (size_t i = i0; i + 1 < traj.times.size(); ++i) {
        if (traj.b_values[i] < mean && traj.b_values[i + 1] >= mean) {
            double lo = traj.times[i], hi = traj.times[i + 1];
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (b_at(mid) < mean ? lo : hi) = mid;
            }
            crossings.push_back(0.5 * (lo + hi));
        }
    }
    if (crossings.size() < 3)
        throw NotPeriodicError("extract_orbit: fewer than 3 upward mean crossings");

    OrbitSummary orbit;
    orbit.crossings = static_cast<int>(crossings.size());
    double sum = 0.0;
    for (size_t i = 0; i + 1 < crossings.size(); ++i) sum += crossings[i + 1] - crossings[i];
    const double n_intervals = static_cast<double>(crossings.size() - 1);
    orbit.period = sum / n_intervals;
    double var = 0.0;
    for (size_t i = 0; i + 1 < crossings.size(); ++i) {
        const double d = (crossings[i + 1] - crossings[i]) - orbit.period;
        var += d * d;
    }
    orbit.periodicity_score = std::sqrt(var / n_intervals) / orbit.period;

    // dense extremes between the first and last crossing
    orbit.b_max = -std::numeric_limits<double>::infinity();
    orbit.b_min = std::numeric_limits<double>::infinity();
    for (size_t i = i0; i + 1 < traj.times.size(); ++i) {
        if (traj.times[i + 1] < crossings.front() || traj.times[i] > crossings.back())
            continue;
        constexpr int kSub = 8;
        for (int s = 0; s <= kSub; ++s) {
            const double t = traj.times[i] +
                             (traj.times[i + 1] - traj.times[i]) * s / double(kSub);
            const double b = b_at(t);
            orbit.b_max = std::max(orbit.b_max, b);
            orbit.b_min = std::min(orbit.b_min, b);
        }
    }
    orbit.anchor_state = sample_state(traj, crossings.back());
    return orbit;
}

MonodromyResult monodromy(const DiscretizedSystem& system, const Eigen::VectorXd& anchor,
                          double period, double rtol, double atol) {
    if (!(period > 0.0)) throw std::invalid_argument("monodromy: period must be > 0");
    const int M = system.mesh.M;

    // joint state [x; vec(Phi)] so Phi sees exactly the x the controller accepts
    Eigen::VectorXd y0(M + M * M);
    y0.head(M) = anchor;
    Eigen::Map<Eigen::MatrixXd>(y0.data() + M, M, M) = Eigen::MatrixXd::Identity(M, M);

    auto f = [&system, M](double, const Eigen::VectorXd& y) {
        Eigen::VectorXd dy(y.size());
        const Eigen::VectorXd x = y.head(M);
        dy.head(M) = rhs(system, x);
        const Eigen::Map<const Eigen::MatrixXd> Phi(y.data() + M, M, M);
        Eigen::Map<Eigen::MatrixXd>(dy.data() + M, M, M) = jacobian(system, x) * Phi;
        return dy;
    };

    Eigen::VectorXd y_end = y0;
    integrate_adaptive(f, y0, 0.0, period, rtol, atol,
                       [&](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) {
                           y_end = y;
                       });

    MonodromyResult result;
    result.end_state = y_end.head(M);
    result.matrix = Eigen::Map<Eigen::MatrixXd>(y_end.data() + M, M, M);
    result.closure_defect = (result.end_state - anchor).norm();
    result.closure_warning = result.closure_defect > 1e-3 * anchor.norm();
    return result;
}

std::vector<std::complex<double>> floquet_multipliers(const Eigen::MatrixXd& monodromy) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(monodromy, false);
    if (solver.info() != Eigen::Success)
        throw NumericError("floquet_multipliers: eigensolver did not converge");
    std::vector<std::complex<double>> mults(
        solver.eigenvalues().data(),
        solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(mults.begin(), mults.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return mults;
}

PeriodicOrbit refine_orbit(const DiscretizedSystem& system, Eigen::VectorXd anchor,
                           double period, double rtol, double atol, int max_iter) {
    const int M = system.mesh.M;
    const double period0 = period;
    // a fixed point closes for every period and degenerates the phase row
    if (rhs(system, anchor).cwiseAbs().maxCoeff() <=
        1e-9 * (1.0 + anchor.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("refine_orbit: anchor is an equilibrium");
    MonodromyResult mono;
    double residual = std::numeric_limits<double>::infinity();

    for (int it = 0; it < max_iter; ++it) {
        mono = monodromy(system, anchor, period, rtol, atol);
        residual = mono.closure_defect;
        if (residual <= 1e-10 * (1.0 + anchor.norm())) {
            PeriodicOrbit orbit;
            orbit.anchor = anchor;
            orbit.period = period;
            orbit.residual = residual;
            orbit.mono = mono;
            return orbit;
        }
        Eigen::MatrixXd A(M + 1, M + 1);
        A.topLeftCorner(M, M) = mono.matrix - Eigen::MatrixXd::Identity(M, M);
        A.topRightCorner(M, 1) = rhs(system, mono.end_state);
        A.bottomLeftCorner(1, M) = rhs(system, anchor).transpose();
        A(M, M) = 0.0;
        Eigen::VectorXd b(M + 1);
        b.head(M) = anchor - mono.end_state;
        b[M] = 0.0;
        const Eigen::VectorXd dz = A.partialPivLu().solve(b);
        anchor += dz.head(M);
        period += dz[M];
        if (!(period > 0.2 * period0) || !(period < 5.0 * period0))
            throw IterationLimitError("refine_orbit: period estimate diverged", residual);
    }
    throw IterationLimitError("refine_orbit: no convergence in " +
                                  std::to_string(max_iter) + " iterations",
                              residual);
}

std::pair<double, double> orbit_range(const DiscretizedSystem& system,
                                      const Eigen::VectorXd& anchor, double period,
                                      double rtol, double atol) {
    Trajectory traj;
    integrate_adaptive(
        [&system](double, const Eigen::VectorXd& x) { return rhs(system, x); }, anchor,
        0.0, period, rtol, atol,
        [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
            traj.times.push_back(t);
            traj.states.push_back(x);
            traj.derivs.push_back(dx);
            traj.b_values.push_back(birth_rate(system, x));
        });
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (size_t i = 0; i + 1 < traj.times.size(); ++i) {
        constexpr int kSub = 8;
        for (int s = 0; s <= kSub; ++s) {
            const double t = traj.times[i] +
                             (traj.times[i + 1] - traj.times[i]) * s / double(kSub);
            const double b = birth_rate(system, sample_state(traj, t));
            hi = std::max(hi, b);
            lo = std::min(lo, b);
        }
    }
    return {lo, hi};
}

}  // namespace renewal
