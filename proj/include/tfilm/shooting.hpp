#pragma once

// Backward shooting from the centre-stable manifold of p+ = (1,0,0,pi/2):
// seeding, blow-up/touchdown classification and bisection on the shooting
// parameter nu.

#include "tfilm/integrate.hpp"
#include "tfilm/systems.hpp"
#include "tfilm/transforms.hpp"
#include "tfilm/verdict.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tfilm {

struct ManifoldSeed {
    double nu = 0.0;
    double sigma = 0.0;  // sigma = -eps puts theta at pi/2 - eps
};

struct ShootConfig {
    double delta0 = 1e-2;       // seed box half-width
    double eps_touch = 1e-4;    // touchdown event level
    double phi_max = 1e6;       // blow-up event level
    double cert_margin = 2.0;   // certify only past margin x the stated bound
    double horizon = 200.0;     // backward tau span per probe
    int horizon_doublings = 3;  // extension cap: horizon * 2^3
    double restart_separation = 1e-7;
    double theta_stop_gap = 0.05;  // refine until theta <= -pi/2 + gap
    int max_stages = 200000;
    IntegratorConfig integ{1e-11, 1e-13};
};

struct ShootTrigger {
    std::string criterion;  // Linf, Lext, eps_touch, phi_max, step_failure, horizon, step_limit
    double tau = 0.0;
    double xi0 = 0.0;
    double phi = 0.0;
    double h3a = 0.0;        // H^3 (xi0^2 + 1 + |a|)
    double threshold = 0.0;  // bound the certificate compared against
    double dh = 0.0;
    double d2h = 0.0;
};

struct ShootOutcome {
    Verdict verdict = Verdict::Undetermined;
    ShootTrigger trigger;
    double tau_end = 0.0;
    Trajectory<4> trajectory;
};

struct ProbeRecord {
    int stage = 0;       // 0: bisection on nu; k > 0: refinement stage k
    double param = 0.0;  // nu at stage 0, interpolation weight otherwise
    Verdict verdict = Verdict::Undetermined;
    ShootTrigger trigger;
    double horizon = 0.0;
};

struct HeteroclinicResult {
    double nu_bar = 0.0;
    std::pair<double, double> bracket;     // (touchdown side, blow-up side)
    bool blowup_above = true;              // orientation: nu_plus is the BlowUp side
    double bracket_width_at_tol = 0.0;
    Trajectory<4> trajectory;              // composite compact trajectory
    std::vector<double> junctions;         // tau where refinement stages join
    std::vector<ProbeRecord> probes;
    int stages = 0;
    double theta_end = 0.0;
};

class BoxViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class BracketInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class HorizonExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Stable eigenvector of the slice system lifted to 4D, and the theta direction.
Vec4 v1_tilde();
Vec4 v4_tilde();

CompactState seed_state(const ManifoldSeed& seed, double delta0 = 1e-2);

// Certificate tests on a physical state (exposed for testing).
std::optional<ShootTrigger> linf_certificate(const PhysState& s, const ModelParams& p, double margin);
std::optional<ShootTrigger> lext_certificate(const PhysState& s, const ModelParams& p, double margin);
// Lower bound the Linf certificate compares H^3 (xi^2+1+|a|) against
// (infinite where neither threshold applies).
double linf_bound(double xi, double a);

ShootOutcome classify_from(const CompactState& x0, double tau0, const ModelParams& p, double horizon,
                           const ShootConfig& cfg);
ShootOutcome classify_backward(const ManifoldSeed& seed, const ModelParams& p, double horizon,
                               const ShootConfig& cfg = {});

// Classify, extending the horizon while the outcome is Undetermined.
ShootOutcome classify_extending(const CompactState& x0, double tau0, const ModelParams& p,
                                const ShootConfig& cfg, double* horizon_used = nullptr);

HeteroclinicResult find_heteroclinic(const ModelParams& p, double sigma, std::pair<double, double> nu_bracket,
                                     double tol, double horizon, const ShootConfig& cfg = {});

struct ProfileCheck {
    Trajectory<4> compact;        // same data as the result, for convenience
    std::vector<double> tau;
    std::vector<PhysState> phys;
    double tail_ratio_start = 0.0;  // |xi|^{2/3} H at the start (xi > 0)
    double tail_ratio_end = 0.0;    // at the end (xi < 0)
    double phi_min = 0.0;
    double phi_max = 0.0;
    double max_residual = 0.0;      // sup |(H''' + xi^2 + a) H^3 - 1|
    long residual_samples = 0;
};

// Physical samples of the composite trajectory plus tail and residual checks.
ProfileCheck heteroclinic_profile(const HeteroclinicResult& r, const ModelParams& p);

// (H''' + xi^2 + a) H^3 - 1 at stencil[centre], with H''' the finite-difference
// derivative of H'' in xi over the whole stencil (arbitrary spacing).
double original_residual(const std::vector<PhysState>& stencil, std::size_t centre, const ModelParams& p);

}  // namespace tfilm
