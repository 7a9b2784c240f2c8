#include "tfilm/polyfamily.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tfilm {

const char* to_string(RightRootKind k) {
    switch (k) {
        case RightRootKind::ZeroRoots: return "ZeroRoots";
        case RightRootKind::TwoRoots: return "TwoRoots";
        case RightRootKind::DoubleRoot: return "DoubleRoot";
    }
    return "?";
}

namespace {
void check_m(double m) {
    if (!(m > 0) || !std::isfinite(m)) throw PolyDomainError("m must be positive and finite");
}

// Bisection on [a, b] with f(a), f(b) of opposite sign down to adjacent doubles,
// then two guarded Newton steps.
double solve_bracketed(const std::function<double(double)>& f, const std::function<double(double)>& df, double a,
                       double b) {
    double fa = f(a);
    for (int it = 0; it < 2000; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double fm = f(m);
        if (fm == 0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    double x = 0.5 * (a + b);
    for (int k = 0; k < 2; ++k) {
        const double fx = f(x), d = df(x);
        if (d == 0) break;
        const double xn = x - fx / d;
        if (std::abs(f(xn)) < std::abs(fx)) x = xn;
    }
    return x;
}
}  // namespace

PolyValue eval_P(double z, const PolyParams& p) {
    const double y = z - 1.0, m = p.m, b = p.beta;
    PolyValue v;
    v.p = y * y * y * (y * y + 5 * y + 10) / 60.0 + m / 9.0 * (5 * y * y - 6 * y + 9) + 0.5 * b * y * y;
    v.d1 = y * y * (y * y + 4 * y + 6) / 12.0 + m / 9.0 * (10 * y - 6) + b * y;
    v.d2 = y * (y * y + 3 * y + 3) / 3.0 + 10.0 * m / 9.0 + b;
    v.d3 = z * z;
    return v;
}

double rel_residual_P(double z, const PolyParams& p) {
    const double y = z - 1.0;
    const double t1 = y * y * y * (y * y + 5 * y + 10) / 60.0;
    const double t2 = p.m / 9.0 * (5 * y * y - 6 * y + 9);
    const double t3 = 0.5 * p.beta * y * y;
    return std::abs(t1 + t2 + t3) / (std::abs(t1) + std::abs(t2) + std::abs(t3));
}

double rel_residual_dP(double z, const PolyParams& p) {
    const double y = z - 1.0;
    const double t1 = y * y * (y * y + 4 * y + 6) / 12.0;
    const double t2 = p.m / 9.0 * (10 * y - 6);
    const double t3 = p.beta * y;
    const double s = std::abs(t1) + std::abs(t2) + std::abs(t3);
    return s > 0 ? std::abs(t1 + t2 + t3) / s : 0.0;
}

double double_zero_condition(double z, double m) {
    const double y = z - 1.0;
    return y * y * y * (3 * y * y + 10 * y + 10) - 40.0 * (3.0 - y) * m;
}

DoubleZeroData double_zero(double m) {
    check_m(m);
    // Work in y = Z - 1 in (0, 3) to keep resolution near Z = 1.
    auto g = [m](double y) { return y * y * y * (3 * y * y + 10 * y + 10) - 40.0 * (3.0 - y) * m; };
    auto dg = [m](double y) { return y * y * (15 * y * y + 40 * y + 30) + 40.0 * m; };
    const double y = solve_bracketed(g, dg, 0.0, 3.0);
    DoubleZeroData d;
    d.z_star = 1.0 + y;
    d.beta_star = -(y * y * (y * y + 4 * y + 6) / 12.0 + 2.0 * m / 9.0 * (5 * y - 3)) / y;
    const PolyParams pp{m, d.beta_star};
    d.second_deriv_at_star = eval_P(d.z_star, pp).d2;
    d.residual_p = rel_residual_P(d.z_star, pp);
    d.residual_d1 = rel_residual_dP(d.z_star, pp);
    return d;
}

Z0Root z0_root(const PolyParams& p) {
    check_m(p.m);
    auto f = [&p](double z) { return eval_P(z, p).p; };
    auto df = [&p](double z) { return eval_P(z, p).d1; };
    // Descend geometrically from Z = 1 (where P = M > 0) to the first sign change.
    double step = 1e-4 * std::min(1.0, std::cbrt(p.m));
    double hi = 1.0, lo = 1.0 - step;
    while (f(lo) > 0) {
        hi = lo;
        step *= 1.05;
        lo = 1.0 - step;
        if (step > 1e12) throw PolyDomainError("no root below Z = 1");
    }
    Z0Root r;
    r.z0 = solve_bracketed(f, df, lo, hi);
    r.slope = df(r.z0);
    return r;
}

double right_root_bound(const PolyParams& p) {
    // y^3 (y^2+5y+10)/60 >= -beta y^2 / 2 once y^3 >= 30 max(0, -beta); the M term is positive.
    return 2.0 + std::cbrt(30.0 * std::max(0.0, -p.beta));
}

RightRoots count_roots_right(const PolyParams& p) {
    check_m(p.m);
    RightRoots r;
    r.z_upper = right_root_bound(p);
    auto f = [&p](double z) { return eval_P(z, p).p; };
    auto df = [&p](double z) { return eval_P(z, p).d1; };
    auto d2f = [&p](double z) { return eval_P(z, p).d2; };

    const int n = 4000;
    const double h = (r.z_upper - 1.0) / n;
    int imin = 0;
    double pmin = f(1.0);
    std::vector<double> zs(n + 1), ps(n + 1);
    for (int i = 0; i <= n; ++i) {
        zs[i] = 1.0 + h * i;
        ps[i] = f(zs[i]);
        if (ps[i] < pmin) {
            pmin = ps[i];
            imin = i;
        }
    }
    // Polish the minimum on P' = 0.
    double zm = zs[imin];
    if (imin > 0 && imin < n && df(zs[imin - 1]) < 0 && df(zs[imin + 1]) > 0)
        zm = solve_bracketed(df, d2f, zs[imin - 1], zs[imin + 1]);
    r.z_min = zm;
    r.p_min = f(zm);

    const double scale = 1.0 + p.m + std::abs(p.beta);
    if (std::abs(r.p_min) <= 1e-10 * scale && std::abs(df(zm)) <= 1e-8 * scale) {
        r.kind = RightRootKind::DoubleRoot;
        r.roots.push_back(zm);
        return r;
    }
    if (r.p_min > 0) {
        r.kind = RightRootKind::ZeroRoots;
        return r;
    }
    r.kind = RightRootKind::TwoRoots;
    // One root on each side of the minimum.
    int i = imin;
    while (i > 0 && ps[i - 1] < 0) --i;
    const double a1 = i > 0 ? zs[i - 1] : 1.0;
    if (f(a1) > 0) r.roots.push_back(solve_bracketed(f, df, a1, zm));
    int j = imin;
    while (j < n && ps[j + 1] < 0) ++j;
    if (j < n) r.roots.push_back(solve_bracketed(f, df, zm, zs[j + 1]));
    return r;
}

PolyValue eval_Pbar(double zeta, const PolyParams& p) {
    check_m(p.m);
    const double k = std::cbrt(p.m), k2 = k * k, b = p.beta, x = zeta;
    const double x2 = x * x, x3 = x2 * x;
    PolyValue v;
    v.p = -(k2 * x2 * x3 - 5 * k * x2 * x2 + 10 * x3) / 60.0 + (5 * k2 * x2 + 6 * k * x + 9) / 9.0 + b * x2 / (2 * k);
    v.d1 = -(5 * k2 * x2 * x2 - 20 * k * x3 + 30 * x2) / 60.0 + (10 * k2 * x + 6 * k) / 9.0 + b * x / k;
    v.d2 = -(20 * k2 * x3 - 60 * k * x2 + 60 * x) / 60.0 + 10 * k2 / 9.0 + b / k;
    v.d3 = -(1 - k * x) * (1 - k * x);
    return v;
}

ZetaMarkers zeta_markers(double m) {
    check_m(m);
    const DoubleZeroData d = double_zero(m);
    const PolyParams p{m, d.beta_star};
    const Z0Root z0 = z0_root(p);
    const double k = std::cbrt(m);
    ZetaMarkers zm;
    zm.zeta_star = -(d.z_star - 1.0) / k;
    zm.zeta0 = -(z0.z0 - 1.0) / k;
    zm.second_deriv_at_zeta_star = eval_Pbar(zm.zeta_star, p).d2;
    zm.slope_at_zeta0 = eval_Pbar(zm.zeta0, p).d1;
    return zm;
}

double fit_c0(const std::vector<double>& m_grid) {
    double c0 = INFINITY;
    for (double m : m_grid) {
        const ZetaMarkers z = zeta_markers(m);
        c0 = std::min(c0, -z.slope_at_zeta0 / std::max(1.0, std::cbrt(m)));
    }
    return c0;
}

}  // namespace tfilm
