#include "tfilm/systems.hpp"

#include <cmath>

namespace tfilm {

Vec3 rhs_original(const PhysState& s, const ModelParams& p) {
    return {s.dh, s.d2h, 1.0 / (s.h * s.h * s.h) - (s.xi * s.xi + p.a)};
}

void rhs_compact(const Vec4& y, const ModelParams& p, Vec4& dy) {
    const double phi = y[0], w = y[1], psi = y[2], th = y[3];
    const double base = 1.0 / (phi * phi * phi) - 1.0;
    dy[0] = w;
    dy[1] = psi;
    double c = slice_of(th) != 0 ? 0.0 : std::cos(th);
    if (c <= 0.0) {
        dy[2] = base;
        dy[3] = 0.0;
        return;
    }
    const double s = std::sin(th);
    // c^{1/9} once; the other fractional powers follow from it.
    const double q = std::cbrt(std::cbrt(c));
    const double c2 = c * c, c3 = c2 * c;
    const double c17_9 = c2 / q;
    const double c26_9 = c3 / q;
    const double c34_9 = c2 * c2 / (q * q);
    const double c17_3 = c3 * c3 / (q * q * q);
    const double f = (16.0 / 3.0 * s - 224.0 / 27.0 * s * s * s) * c17_3 * phi +
                     (208.0 / 81.0 * s * s - 10.0 / 9.0) * c34_9 * w + (2.0 / 3.0) * s * c17_9 * psi;
    dy[2] = base - (p.a - 1.0) * c2 - f;
    dy[3] = c26_9;
}

Vec4 rhs_compact(const CompactState& s, const ModelParams& p) {
    Vec4 dy;
    rhs_compact(to_vec(s), p, dy);
    return dy;
}

double f_terms_xi(double xi, double phi, double w, double psi) {
    const double q = xi * xi + 1.0;
    return 16.0 / 3.0 * xi / std::pow(q, 10.0 / 3.0) * (1.0 - 14.0 / 9.0 * xi * xi / q) * phi +
           std::pow(q, -17.0 / 9.0) * (208.0 / 81.0 * xi * xi / q - 10.0 / 9.0) * w +
           2.0 / 3.0 * xi / std::pow(q, 13.0 / 9.0) * psi;
}

Vec3 rhs_limit(const LimitState& s) {
    return {s.w, s.psi, 1.0 / (s.phi * s.phi * s.phi) - 1.0};
}

Mat3 jacobian_limit(const LimitState& s) {
    const double p4 = s.phi * s.phi * s.phi * s.phi;
    return {{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {-3.0 / p4, 0.0, 0.0}}};
}

Vec4 rhs_bounce(const BounceState& s, const ModelParams& p, BounceMode mode) {
    const double hz = s.u * s.hval;
    const double uz = s.v + s.u * s.u / 3.0;
    double vz = 1.0 + 5.0 / 3.0 * s.u * s.v;
    if (mode == BounceMode::Frozen) return {hz, uz, vz, 0.0};
    vz -= (s.omega * s.omega + p.a) * s.hval * s.hval * s.hval;
    return {hz, uz, vz, std::pow(s.hval, 4.0 / 3.0)};
}

std::array<double, 2> rhs_frozen_uv(double u, double v) {
    return {v + u * u / 3.0, 1.0 + 5.0 / 3.0 * u * v};
}

Mat2 jacobian_frozen_uv(double u, double v) {
    return {{{2.0 * u / 3.0, 1.0}, {5.0 / 3.0 * v, 5.0 / 3.0 * u}}};
}

Vec3 rhs_inner_h(const Vec3& s, double perturbation) {
    return {s[1], s[2], 1.0 / (s[0] * s[0] * s[0]) - perturbation};
}

}  // namespace tfilm
