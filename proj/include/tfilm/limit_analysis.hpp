#pragma once

// The invariant-slice system Phi''' = 1/Phi^3 - 1: eigen-structure at
// P_s = (1,0,0), Lyapunov function, stable-manifold dichotomy and the
// blow-up / touchdown asymptotic constants.

#include "tfilm/integrate.hpp"
#include "tfilm/systems.hpp"
#include "tfilm/verdict.hpp"

#include <complex>
#include <optional>
#include <stdexcept>

namespace tfilm {

struct EigenData {
    double lambda1 = 0.0;
    Vec3 v1{};
    std::complex<double> lambda2;
    Vec3 v2{};  // v2 - i v3 is an eigenvector of lambda2
    Vec3 v3{};
    double residual = 0.0;       // max ||J v - lambda v|| over the pairs
    double closed_form_gap = 0.0;  // max deviation of the numerics from the closed forms
};

namespace closed_form {
double lambda1();
std::complex<double> lambda2();
Vec3 v1();
Vec3 v2();
Vec3 v3();
}  // namespace closed_form

enum class Side { PhiAboveOne, PhiBelowOne };

struct DichotomyResult {
    Side side = Side::PhiAboveOne;
    Verdict verdict = Verdict::Undetermined;
    std::optional<double> tau_star;
    double fit_constant = 0.0;
    double fit_residual = 0.0;
};

struct LimitRunConfig {
    double eps_touch = 1e-4;
    double phi_max = 1e6;
    IntegratorConfig integ{1e-12, 1e-14};
};

struct StableManifoldRun {
    Trajectory<3> trajectory;       // backward from the seed
    Verdict verdict = Verdict::Undetermined;
    double reconvergence = 0.0;     // distance to P_s after forward time 5/|lambda1|
};

struct BlowupFit {
    double constant = 0.0;  // c in Phi ~ -c (tau - tau0)^3 / 6
    double tau0 = 0.0;
    double residual = 0.0;  // relative RMS over the window
};

struct TouchdownFit {
    double constant = 0.0;  // c in Phi ~ c (tau - tau_star)^{3/4}
    double tau_star = 0.0;
    double residual = 0.0;
};

class InsufficientSpan : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

EigenData eigen_Ps();

double lyapunov(const LimitState& s);

// Invariant-region certificates of the slice system read backward in tau:
// Phi > 1, W < 0, Psi > 0 forces Phi -> infinity; Phi < 1, W > 0, Psi < 0
// forces Phi -> 0 at finite tau.
Verdict limit_region_verdict(const Vec3& y);

StableManifoldRun stable_manifold_trajectory(Side side, double offset, double horizon,
                                             const LimitRunConfig& cfg = {});

BlowupFit fit_blowup_constant(const Trajectory<3>& traj);
TouchdownFit fit_touchdown_constant(const Trajectory<3>& traj, double eps_touch = 1e-4);

DichotomyResult dichotomy(Side side, double offset, double horizon, const LimitRunConfig& cfg = {});

}  // namespace tfilm
