#pragma once

// The quintic outer family P(Z; M, beta), its double-zero locus, the root
// below Z = 1 and the rescaled form Pbar(zeta) = P(1 - M^{1/3} zeta) / M.

#include <stdexcept>
#include <vector>

namespace tfilm {

struct PolyParams {
    double m = 1.0;
    double beta = 0.0;
};

struct PolyValue {
    double p = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

struct DoubleZeroData {
    double z_star = 0.0;
    double beta_star = 0.0;
    double second_deriv_at_star = 0.0;
    double residual_p = 0.0;   // |P| / sum of |terms| at (z_star, beta_star)
    double residual_d1 = 0.0;  // same for dP/dZ
};

struct Z0Root {
    double z0 = 0.0;
    double slope = 0.0;  // dP/dZ at z0
};

enum class RightRootKind { ZeroRoots, TwoRoots, DoubleRoot };
const char* to_string(RightRootKind k);

struct RightRoots {
    RightRootKind kind = RightRootKind::ZeroRoots;
    std::vector<double> roots;  // Z >= 1, increasing; the double root appears once
    double z_min = 0.0;         // location of min P on [1, z_upper]
    double p_min = 0.0;
    double z_upper = 0.0;
};

struct ZetaMarkers {
    double zeta_star = 0.0;
    double zeta0 = 0.0;
    double second_deriv_at_zeta_star = 0.0;
    double slope_at_zeta0 = 0.0;
};

class PolyDomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

PolyValue eval_P(double z, const PolyParams& p);
// Normalised residual |P| / (sum of |terms|), and the same for dP/dZ.
double rel_residual_P(double z, const PolyParams& p);
double rel_residual_dP(double z, const PolyParams& p);

DoubleZeroData double_zero(double m);
// (Z-1)^3 (3Z^2 + 4Z + 3) - 40 (4 - Z) M
double double_zero_condition(double z, double m);

Z0Root z0_root(const PolyParams& p);

// P > 0 for Z above this bound.
double right_root_bound(const PolyParams& p);
RightRoots count_roots_right(const PolyParams& p);

PolyValue eval_Pbar(double zeta, const PolyParams& p);

ZetaMarkers zeta_markers(double m);

// min over the grid of -dPbar/dzeta(zeta0) / max(1, m^{1/3}) at beta = beta*(m).
double fit_c0(const std::vector<double>& m_grid);

}  // namespace tfilm
