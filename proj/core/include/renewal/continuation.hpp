#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "renewal/model.hpp"
#include "renewal/spectral.hpp"

namespace renewal {

/// Flags attached to branch points adjacent to a detected bifurcation.
/// Zero crossings of a real eigenvalue are not classified further (fold vs
/// transcritical needs branch switching), so both candidate bits are set.
enum BranchFlags : unsigned {
    kFlagFold = 1u << 0,
    kFlagTranscriticalCandidate = 1u << 1,
    kFlagHopf = 1u << 2,
};

struct BranchPoint {
    double param = 0.0;
    double b_eq = 0.0;
    Eigen::VectorXd x_eq;
    std::complex<double> rightmost;
    bool stable = false;
    unsigned flags = 0;
};

struct Branch {
    std::vector<BranchPoint> points;
    bool complete = true;
    std::string termination_reason;  ///< set when the branch is truncated
};

/// Natural-parameter continuation of the scalar equilibrium over the family
/// range with n_points accepted points. The previous equilibrium value is
/// the predictor; the corrector is the scalar damped Newton, with parameter
/// step halving (up to 8 times) on corrector failure. Stability comes from
/// the full discretized spectrum at each accepted point.
Branch continue_equilibria(const ModelFamily& family, const ChebyshevMesh& mesh,
                           double start_b, int n_points, int nq = 0);

enum class BifurcationKind { hopf, zero_crossing };

struct BifurcationPoint {
    BifurcationKind kind = BifurcationKind::zero_crossing;
    double param = 0.0;
    double b_eq = 0.0;
    std::complex<double> eigenvalue;
    double refinement_residual = 0.0;  ///< |Re(rightmost)| at the refined parameter
    bool refined = false;
};

/// Scan a branch for sign changes of Re(rightmost) between consecutive
/// points, refine each by secant iteration on the parameter to
/// |Re| <= tol, and classify by the imaginary part of the crossing pair.
/// Unrefinable crossings are emitted with refined = false.
std::vector<BifurcationPoint> detect_bifurcations(const Branch& branch,
                                                  const ModelFamily& family,
                                                  const ChebyshevMesh& mesh,
                                                  int nq = 0, double tol = 1e-8);

/// Mark the branch points bracketing each bifurcation with the matching flag.
void apply_flags(Branch& branch, const std::vector<BifurcationPoint>& bifurcations);

struct HopfCurvePoint {
    double param2 = 0.0;
    bool found = false;
    double hopf_param1 = 0.0;  ///< meaningful only when found
    std::string note;          ///< per-point failure/gap reason
};

/// Trace a Hopf location across a second parameter by running a one-parameter
/// continuation + detection per grid value. Missing detections and per-point
/// failures become gaps, never errors. Grid values are independent and run on
/// up to n_threads workers; results keep grid order.
std::vector<HopfCurvePoint> hopf_curve(
    const std::function<ModelFamily(double)>& family_at,
    const std::vector<double>& grid,
    const std::function<double(double)>& start_b_at, const ChebyshevMesh& mesh,
    int n_points = 50, int nq = 0, int n_threads = 1);

}  // namespace renewal
