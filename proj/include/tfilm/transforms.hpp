#pragma once

// Coordinate systems for (H''' + xi^2 + a) H^3 = 1 and the exact changes of
// variables between physical, compact and inner (bounce) coordinates.

#include <numbers>
#include <stdexcept>

namespace tfilm {

inline constexpr double kHalfPi = std::numbers::pi / 2;
inline constexpr double kSliceTol = 1e-14;

struct ModelParams {
    double a = 0.0;
};

struct PhysState {
    double xi = 0.0;
    double h = 1.0;
    double dh = 0.0;
    double d2h = 0.0;
};

struct CompactState {
    double phi = 1.0;
    double w = 0.0;
    double psi = 0.0;
    double theta = 0.0;
};

struct BounceState {
    double hval = 1.0;
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;
    double omega = 0.0;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IterationLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// +1 / -1 when theta sits on the upper / lower invariant slice, else 0.
int slice_of(double theta);

// tau = int_0^xi (eta^2 + 1)^{4/9} d eta.
double tau_of_xi(double xi);
double xi_of_tau(double tau);
// Far-field leading order tau ~ (9/17) xi |xi|^{8/9}, inverted.
double xi_of_tau_farfield(double tau);

double theta_of_xi(double xi);
double xi_of_theta(double theta);

CompactState compact_of_phys(const PhysState& s);
PhysState phys_of_compact(const CompactState& s);

// z of the returned state is z_at_state (the caller's anchor); omega = xi.
BounceState bounce_of_phys(const PhysState& s, double z_at_state = 0.0);
PhysState phys_of_bounce(const BounceState& b);

}  // namespace tfilm
