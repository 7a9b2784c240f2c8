#include "tfilm/transforms.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace tfilm {

int slice_of(double theta) {
    if (std::abs(theta - kHalfPi) < kSliceTol) return 1;
    if (std::abs(theta + kHalfPi) < kSliceTol) return -1;
    return 0;
}

double tau_of_xi(double xi) {
    if (xi == 0.0) return 0.0;
    const double x = std::abs(xi);
    auto f = [](double eta) { return std::pow(eta * eta + 1.0, 4.0 / 9.0); };
    double err = 0;
    const double val =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, x, 15, 1e-13, &err);
    return xi < 0 ? -val : val;
}

double xi_of_tau_farfield(double tau) {
    const double x = std::pow(17.0 * std::abs(tau) / 9.0, 9.0 / 17.0);
    return tau < 0 ? -x : x;
}

double xi_of_tau(double tau) {
    if (tau == 0.0) return 0.0;
    const double target = std::abs(tau);
    // tau(xi) >= xi, so the root lies in [0, |tau|].
    double lo = 0.0, hi = target;
    double x = std::min(target, xi_of_tau_farfield(target));
    const double tol = 1e-12 * (1.0 + target);
    for (int it = 0; it < 100; ++it) {
        const double g = tau_of_xi(x) - target;
        if (std::abs(g) <= tol) return tau < 0 ? -x : x;
        if (g > 0) hi = x; else lo = x;
        double xn = x - g / std::pow(x * x + 1.0, 4.0 / 9.0);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
    }
    throw IterationLimit("xi_of_tau: Newton did not converge");
}

double theta_of_xi(double xi) { return std::atan(xi); }

double xi_of_theta(double theta) {
    if (!(std::abs(theta) < kHalfPi)) throw DomainError("xi_of_theta: |theta| >= pi/2");
    return std::tan(theta);
}

CompactState compact_of_phys(const PhysState& s) {
    if (!(s.h > 0)) throw DomainError("compact_of_phys: h must be positive");
    const double x = s.xi, q = x * x + 1.0;
    CompactState c;
    c.phi = std::cbrt(q) * s.h;
    c.w = std::pow(q, -1.0 / 9.0) * (s.dh + (2.0 / 3.0) * x * std::pow(q, -4.0 / 3.0) * c.phi);
    c.psi = std::pow(q, -5.0 / 9.0) *
            (s.d2h + (2.0 / 3.0) * (1.0 - (5.0 / 3.0) * x * x) * std::pow(q, -7.0 / 3.0) * c.phi +
             (4.0 / 9.0) * x * std::pow(q, -8.0 / 9.0) * c.w);
    c.theta = theta_of_xi(x);
    return c;
}

PhysState phys_of_compact(const CompactState& c) {
    if (slice_of(c.theta) != 0 || !(std::abs(c.theta) < kHalfPi))
        throw DomainError("phys_of_compact: theta on an invariant slice");
    const double x = std::tan(c.theta), q = x * x + 1.0;
    PhysState s;
    s.xi = x;
    s.h = c.phi / std::cbrt(q);
    s.dh = -(2.0 / 3.0) * x * std::pow(q, -4.0 / 3.0) * c.phi + std::pow(q, 1.0 / 9.0) * c.w;
    s.d2h = -(2.0 / 3.0) * (1.0 - (5.0 / 3.0) * x * x) * std::pow(q, -7.0 / 3.0) * c.phi -
            (4.0 / 9.0) * x * std::pow(q, -8.0 / 9.0) * c.w + std::pow(q, 5.0 / 9.0) * c.psi;
    return s;
}

BounceState bounce_of_phys(const PhysState& s, double z_at_state) {
    if (!(s.h > 0)) throw DomainError("bounce_of_phys: h must be positive");
    BounceState b;
    b.hval = s.h;
    b.u = std::cbrt(s.h) * s.dh;
    b.v = std::pow(s.h, 5.0 / 3.0) * s.d2h;
    b.z = z_at_state;
    b.omega = s.xi;
    return b;
}

PhysState phys_of_bounce(const BounceState& b) {
    if (!(b.hval > 0)) throw DomainError("phys_of_bounce: h must be positive");
    PhysState s;
    s.xi = b.omega;
    s.h = b.hval;
    s.dh = b.u / std::cbrt(b.hval);
    s.d2h = b.v * std::pow(b.hval, -5.0 / 3.0);
    return s;
}

}  // namespace tfilm
