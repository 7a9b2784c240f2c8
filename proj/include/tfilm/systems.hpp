#pragma once

// Right-hand sides of the ODE systems: original, compact, limit slice,
// bounce (full and frozen) and the inner matching equation.

#include "tfilm/integrate.hpp"
#include "tfilm/transforms.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace tfilm {

using Vec3 = Vec<3>;
using Vec4 = Vec<4>;
using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

template <std::size_t N>
struct VectorField {
    static constexpr std::size_t dimension = N;
    std::function<void(double, const Vec<N>&, Vec<N>&)> eval;
};

struct LimitState {
    double phi = 1.0;
    double w = 0.0;
    double psi = 0.0;
};

enum class BounceMode { Full, Frozen };

inline Vec4 to_vec(const CompactState& s) { return {s.phi, s.w, s.psi, s.theta}; }
inline CompactState compact_from(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
inline Vec3 to_vec(const LimitState& s) { return {s.phi, s.w, s.psi}; }

// d/dxi (h, h', h'') for the original equation.
Vec3 rhs_original(const PhysState& s, const ModelParams& p);

// d/dtau (Phi, W, Psi, theta); on the slices this is (rhs_limit, 0) exactly.
Vec4 rhs_compact(const CompactState& s, const ModelParams& p);
void rhs_compact(const Vec4& y, const ModelParams& p, Vec4& dy);

// The bracketed F-term of the Psi equation written in xi (tau-independent form).
double f_terms_xi(double xi, double phi, double w, double psi);

Vec3 rhs_limit(const LimitState& s);
Mat3 jacobian_limit(const LimitState& s);

// d/dz of (H, u, v, Omega); frozen mode keeps Omega fixed and drops (Omega^2+a)H^3.
Vec4 rhs_bounce(const BounceState& s, const ModelParams& p, BounceMode mode);
// Planar frozen field (du/dz, dv/dz) and its Jacobian.
std::array<double, 2> rhs_frozen_uv(double u, double v);
Mat2 jacobian_frozen_uv(double u, double v);

// (h', h'', 1/h^3 - perturbation)
Vec3 rhs_inner_h(const Vec3& s, double perturbation = 0.0);

}  // namespace tfilm
