#include "tfilm/limit_analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace tfilm {

namespace closed_form {
double lambda1() { return -std::cbrt(3.0); }
std::complex<double> lambda2() { return std::cbrt(3.0) * std::complex<double>(0.5, std::sqrt(3.0) / 2); }
Vec3 v1() { return {std::pow(3.0, -2.0 / 3.0), -std::pow(3.0, -1.0 / 3.0), 1.0}; }
// Real and (minus) imaginary parts of (1/lambda2^2, 1/lambda2, 1).
Vec3 v2() { return {-std::cbrt(3.0) / 6.0, std::pow(3.0, 2.0 / 3.0) / 6.0, 1.0}; }
Vec3 v3() { return {std::pow(3.0, 5.0 / 6.0) / 6.0, std::pow(3.0, 1.0 / 6.0) / 2.0, 0.0}; }
}  // namespace closed_form

EigenData eigen_Ps() {
    const Mat3 j = jacobian_limit({1.0, 0.0, 0.0});
    Eigen::Matrix3d J;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) J(r, c) = j[r][c];
    Eigen::EigenSolver<Eigen::Matrix3d> es(J);
    const auto ev = es.eigenvalues();
    const auto vecs = es.eigenvectors();

    int ireal = 0, icplx = -1;
    for (int k = 0; k < 3; ++k)
        if (std::abs(ev[k].imag()) < std::abs(ev[ireal].imag())) ireal = k;
    for (int k = 0; k < 3; ++k)
        if (k != ireal && ev[k].imag() > 0) icplx = k;

    EigenData d;
    d.lambda1 = ev[ireal].real();
    Eigen::Vector3cd e1 = vecs.col(ireal) / vecs(2, ireal);
    for (int i = 0; i < 3; ++i) d.v1[i] = e1[i].real();
    d.lambda2 = ev[icplx];
    Eigen::Vector3cd e2 = vecs.col(icplx) / vecs(2, icplx);
    for (int i = 0; i < 3; ++i) {
        d.v2[i] = e2[i].real();
        d.v3[i] = -e2[i].imag();
    }

    Eigen::Vector3d v1(d.v1.data());
    d.residual = (J * v1 - d.lambda1 * v1).norm();
    d.residual = std::max(d.residual, (J.cast<std::complex<double>>() * e2 - d.lambda2 * e2).norm());

    double gap = std::abs(d.lambda1 - closed_form::lambda1());
    gap = std::max(gap, std::abs(d.lambda2 - closed_form::lambda2()));
    const Vec3 c1 = closed_form::v1(), c2 = closed_form::v2(), c3 = closed_form::v3();
    for (int i = 0; i < 3; ++i) {
        gap = std::max(gap, std::abs(d.v1[i] - c1[i]));
        gap = std::max(gap, std::abs(d.v2[i] - c2[i]));
        gap = std::max(gap, std::abs(d.v3[i] - c3[i]));
    }
    d.closed_form_gap = gap;
    return d;
}

double lyapunov(const LimitState& s) { return s.psi * s.w + 1.0 / (2.0 * s.phi * s.phi) + s.phi; }

Verdict limit_region_verdict(const Vec3& y) {
    if (y[0] > 1.0 && y[1] < 0.0 && y[2] > 0.0) return Verdict::BlowUp;
    if (y[0] < 1.0 && y[1] > 0.0 && y[2] < 0.0) return Verdict::Touchdown;
    return Verdict::Undetermined;
}

namespace {
void limit_field(double, const Vec3& y, Vec3& dy) {
    dy[0] = y[1];
    dy[1] = y[2];
    dy[2] = 1.0 / (y[0] * y[0] * y[0]) - 1.0;
}

std::vector<Event<3>> limit_events(double eps_touch, double phi_max) {
    std::vector<Event<3>> ev(2);
    ev[0].kind = EventKind::Touchdown;
    ev[0].label = "eps_touch";
    ev[0].direction = Direction::Falling;
    ev[0].guard = [eps_touch](double, const Vec3& y) { return y[0] - eps_touch; };
    ev[1].kind = EventKind::BlowUp;
    ev[1].label = "phi_max";
    ev[1].direction = Direction::Rising;
    ev[1].guard = [phi_max](double, const Vec3& y) { return y[0] - phi_max; };
    return ev;
}

// Gauss-Newton on two parameters with relative residuals.
template <class Model>
void gauss_newton2(const std::vector<double>& t, const std::vector<double>& y, double& p0, double& p1,
                   Model model, int iters = 60) {
    for (int it = 0; it < iters; ++it) {
        double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double m, d0, d1;
            model(t[i], p0, p1, m, d0, d1);
            const double r = (m - y[i]) / y[i];
            d0 /= y[i];
            d1 /= y[i];
            a00 += d0 * d0;
            a01 += d0 * d1;
            a11 += d1 * d1;
            b0 += d0 * r;
            b1 += d1 * r;
        }
        const double det = a00 * a11 - a01 * a01;
        if (!(std::abs(det) > 0)) break;
        const double s0 = (a11 * b0 - a01 * b1) / det;
        const double s1 = (a00 * b1 - a01 * b0) / det;
        p0 -= s0;
        p1 -= s1;
        if (std::abs(s0) <= 1e-15 * std::abs(p0) && std::abs(s1) <= 1e-15 * (1 + std::abs(p1))) break;
    }
}

template <class Model>
double rel_rms(const std::vector<double>& t, const std::vector<double>& y, double p0, double p1, Model model) {
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double m, d0, d1;
        model(t[i], p0, p1, m, d0, d1);
        const double r = (m - y[i]) / y[i];
        s += r * r;
    }
    return std::sqrt(s / t.size());
}

void line_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& icpt) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    icpt = (sy - slope * sx) / n;
}
}  // namespace

StableManifoldRun stable_manifold_trajectory(Side side, double offset, double horizon, const LimitRunConfig& cfg) {
    if (!(offset > 0 && offset <= 1e-4)) throw std::invalid_argument("offset must lie in (0, 1e-4]");
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
    const double sgn = side == Side::PhiAboveOne ? 1.0 : -1.0;
    const Vec3 v = closed_form::v1();
    Vec3 y0;
    for (int i = 0; i < 3; ++i) y0[i] = (i == 0 ? 1.0 : 0.0) + sgn * offset * v[i];

    StableManifoldRun run;
    const double tf = 5.0 / std::abs(closed_form::lambda1());
    auto fwd = integrate<3>(limit_field, y0, 0.0, tf, {}, cfg.integ);
    const Vec3 yf = fwd.back();
    run.reconvergence = std::sqrt((yf[0] - 1) * (yf[0] - 1) + yf[1] * yf[1] + yf[2] * yf[2]);

    run.trajectory = integrate<3>(limit_field, y0, 0.0, -horizon, limit_events(cfg.eps_touch, cfg.phi_max), cfg.integ);
    const auto& tr = run.trajectory;
    if (tr.terminal_event && tr.terminal_event->kind == EventKind::Touchdown) run.verdict = Verdict::Touchdown;
    else if (tr.terminal_event && tr.terminal_event->kind == EventKind::BlowUp) run.verdict = Verdict::BlowUp;
    else if (tr.status == Status::StepFailure) run.verdict = Verdict::BlowUp;
    else run.verdict = limit_region_verdict(tr.back());
    return run;
}

BlowupFit fit_blowup_constant(const Trajectory<3>& traj) {
    const double t0 = traj.t_begin(), te = traj.t_end();
    const double span = std::abs(te - t0);
    if (span < 30.0) throw InsufficientSpan("blow-up fit needs |tau| >= 30");
    // Window |tau| in [0.5 |tau_end|, |tau_end|], tau measured from the seed.
    const double ta = t0 + 0.5 * (te - t0);
    const int n = 400;
    std::vector<double> t(n), y(n), c(n);
    for (int i = 0; i < n; ++i) {
        t[i] = ta + (te - ta) * i / (n - 1) - t0;
        y[i] = traj.eval(t[i] + t0)[0];
        c[i] = std::cbrt(y[i]);
    }
    // Phi^{1/3} = (c/6)^{1/3} (tau0 - tau) is linear in tau.
    double slope, icpt;
    line_fit(t, c, slope, icpt);
    BlowupFit f;
    double k = -slope;
    f.constant = 6.0 * k * k * k;
    f.tau0 = icpt / k;
    auto model = [](double tt, double cc, double s0, double& m, double& d0, double& d1) {
        const double u = s0 - tt;
        m = cc * u * u * u / 6.0;
        d0 = u * u * u / 6.0;
        d1 = cc * u * u / 2.0;
    };
    gauss_newton2(t, y, f.constant, f.tau0, model);
    f.residual = rel_rms(t, y, f.constant, f.tau0, model);
    f.tau0 += t0;
    return f;
}

TouchdownFit fit_touchdown_constant(const Trajectory<3>& traj, double eps_touch) {
    if (!traj.terminal_event || traj.terminal_event->kind != EventKind::Touchdown)
        throw InsufficientSpan("touchdown fit needs a trajectory stopped by the touchdown event");
    const double te = traj.t_end();
    // Find the last node with Phi >= 10 eps_touch, then refine on the dense output.
    const double upper = 10.0 * eps_touch;
    std::size_t k = traj.t.size() - 1;
    while (k > 0 && traj.y[k][0] < upper) --k;
    if (traj.y[k][0] < upper) throw InsufficientSpan("trajectory never above 10 eps_touch");
    double a = traj.t[k], b = traj.t[std::min(k + 1, traj.t.size() - 1)];
    for (int it = 0; it < 200 && a != b; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        if (traj.eval(m)[0] >= upper) a = m; else b = m;
    }
    const double tu = a;
    const int n = 400;
    std::vector<double> t(n), y(n), q(n);
    for (int i = 0; i < n; ++i) {
        t[i] = te + (tu - te) * i / (n - 1);
        y[i] = traj.eval(t[i])[0];
        q[i] = std::pow(y[i], 4.0 / 3.0);
    }
    if (std::abs(tu - te) <= 0) throw InsufficientSpan("empty touchdown window");
    // Phi^{4/3} = c^{4/3} (tau - tau_star) is linear in tau.
    const double shift = te;
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i) ts[i] = t[i] - shift;
    double slope, icpt;
    line_fit(ts, q, slope, icpt);
    TouchdownFit f;
    f.constant = std::pow(slope, 3.0 / 4.0);
    double ts_star = -icpt / slope;
    auto model = [](double tt, double cc, double s0, double& m, double& d0, double& d1) {
        const double u = std::max(tt - s0, 1e-300);
        const double p = std::pow(u, 0.75);
        m = cc * p;
        d0 = p;
        d1 = -0.75 * cc * p / u;
    };
    gauss_newton2(ts, y, f.constant, ts_star, model);
    f.residual = rel_rms(ts, y, f.constant, ts_star, model);
    f.tau_star = ts_star + shift;
    return f;
}

DichotomyResult dichotomy(Side side, double offset, double horizon, const LimitRunConfig& cfg) {
    DichotomyResult d;
    d.side = side;
    const StableManifoldRun run = stable_manifold_trajectory(side, offset, horizon, cfg);
    d.verdict = run.verdict;
    if (run.verdict == Verdict::Touchdown) {
        const TouchdownFit f = fit_touchdown_constant(run.trajectory, cfg.eps_touch);
        d.tau_star = f.tau_star;
        d.fit_constant = f.constant;
        d.fit_residual = f.residual;
    } else if (run.verdict == Verdict::BlowUp && std::abs(run.trajectory.t_end()) >= 30.0) {
        const BlowupFit f = fit_blowup_constant(run.trajectory);
        d.fit_constant = f.constant;
        d.fit_residual = f.residual;
    }
    return d;
}

}  // namespace tfilm
