#include "tfilm/oscillation.hpp"

#include "tfilm/polyfamily.hpp"
#include "tfilm/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace tfilm {

namespace {
struct RawExt {
    double tau;
    double phi;
    bool is_max;
};

// Root of W inside step i, bracketed by [a, b].
double refine_w(const Trajectory<4>& tr, std::size_t i, double a, double b) {
    double wa = tr.eval_step(i, a)[1];
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double wm = tr.eval_step(i, m)[1];
        if (wm == 0) return m;
        if ((wm > 0) == (wa > 0)) {
            a = m;
            wa = wm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}
}  // namespace

ExtremaSequence extract_extrema(const Trajectory<4>& traj, double min_prominence) {
    std::vector<RawExt> raw;
    for (std::size_t i = 0; i + 1 < traj.t.size(); ++i) {
        const double w0 = traj.y[i][1], w1 = traj.y[i + 1][1];
        if (w0 == 0 || (w0 > 0) == (w1 > 0) || w1 == 0) continue;
        const double tq = refine_w(traj, i, traj.t[i], traj.t[i + 1]);
        // Orientation in increasing tau: W goes + to - at a maximum.
        const bool fwd = traj.t[i + 1] > traj.t[i];
        const bool is_max = fwd ? (w0 > 0) : (w1 > 0);
        raw.push_back({tq, traj.eval_step(i, tq)[0], is_max});
    }
    std::sort(raw.begin(), raw.end(), [](const RawExt& a, const RawExt& b) { return a.tau > b.tau; });

    // Drop adjacent pairs of low prominence; removing a pair keeps the alternation.
    bool changed = true;
    while (changed && raw.size() >= 2) {
        changed = false;
        std::size_t best = 0;
        double best_rel = INFINITY;
        for (std::size_t k = 0; k + 1 < raw.size(); ++k) {
            const double scale = std::max(std::abs(raw[k].phi), std::abs(raw[k + 1].phi));
            const double rel = std::abs(raw[k].phi - raw[k + 1].phi) / scale;
            if (rel < best_rel) {
                best_rel = rel;
                best = k;
            }
        }
        if (best_rel < min_prominence) {
            raw.erase(raw.begin() + best, raw.begin() + best + 2);
            changed = true;
        }
    }
    ExtremaSequence s;
    for (const auto& e : raw) (e.is_max ? s.maxima : s.minima).push_back({e.tau, e.phi});
    return s;
}

double tau_at_theta(const Trajectory<4>& traj, double theta) {
    double a = traj.t_begin(), b = traj.t_end();
    const double ta = traj.y.front()[3], tb = traj.y.back()[3];
    if ((theta - ta) * (theta - tb) > 0) throw WindowEmpty("theta outside the trajectory");
    double fa = ta - theta;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double fm = traj.eval(m)[3] - theta;
        if (fm == 0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

RescaledMax rescale_at(const Trajectory<4>& traj, double tau_star) {
    const Vec4 y = traj.eval(tau_star);
    RescaledMax r;
    r.tau_star = tau_star;
    r.phi_star = y[0];
    // xi from theta: the compact tau of a trajectory carries an arbitrary offset.
    r.xi_star = std::tan(y[3]);
    const double ax = std::abs(r.xi_star);
    r.m_n = y[0] / std::pow(ax, 17.0 / 3.0);
    r.beta_n = std::pow(r.xi_star * r.xi_star + 1.0, 8.0 / 9.0) / std::pow(ax, 11.0 / 3.0) * y[2];
    r.delta_n = 1.0 / (std::pow(ax, 17.0) * r.m_n * r.m_n * r.m_n);
    return r;
}

RescaledMax rescale_max(const Trajectory<4>& traj, const ExtremaSequence& seq, int max_index) {
    if (max_index < 0 || std::size_t(max_index) >= seq.maxima.size()) throw std::out_of_range("no such maximum");
    return rescale_at(traj, seq.maxima[max_index].tau);
}

PolyComparison compare_to_polynomial(const Trajectory<4>& traj, const RescaledMax& r, double margin, int samples) {
    PolyComparison c;
    const PolyParams pp{r.m_n, r.beta_n};
    const double k = std::cbrt(r.m_n);
    const Z0Root z0 = z0_root(pp);
    c.zeta0 = -(z0.z0 - 1.0) / k;
    c.zeta_end = (1.0 - margin) * c.zeta0;
    c.beta_star = double_zero(r.m_n).beta_star;
    c.beta_rel_dev = std::abs(r.beta_n - c.beta_star) / std::abs(c.beta_star);

    const double xs = r.xi_star, ax = std::abs(xs);
    const double amp = std::pow(ax, 5.0) * r.m_n;
    const double dxi = -xs * k;  // d xi / d zeta
    const double xi_end = xs * (1.0 - k * c.zeta_end);
    const double th_lo = std::min(std::atan(xs), std::atan(xi_end));
    const double th_hi = std::max(std::atan(xs), std::atan(xi_end));
    const double tmin = std::min(traj.y.front()[3], traj.y.back()[3]);
    const double tmax = std::max(traj.y.front()[3], traj.y.back()[3]);
    if (!(c.zeta_end > 0) || th_lo < tmin || th_hi > tmax) throw WindowEmpty("trajectory does not cover the window");

    std::vector<double> e1, e2;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < samples; ++i) {
        const double zeta = c.zeta_end * i / (samples - 1);
        const double xi = xs * (1.0 - k * zeta);
        const double tau = tau_at_theta(traj, std::atan(xi));
        const Vec4 y = traj.eval(tau);
        const PhysState ph = phys_of_compact(compact_from(y));
        const double hn = ph.h / amp;
        const double hn1 = ph.dh * dxi / amp;
        const double hn2 = ph.d2h * dxi * dxi / amp;
        const PolyValue pb = eval_Pbar(zeta, pp);
        c.max_rel_dev = std::max(c.max_rel_dev, std::abs(hn - pb.p) / std::abs(pb.p));
        e1.push_back(std::abs(hn1 - pb.d1));
        e2.push_back(std::abs(hn2 - pb.d2));
        s1 = std::max(s1, std::abs(pb.d1));
        s2 = std::max(s2, std::abs(pb.d2));
    }
    c.max_d1_dev = *std::max_element(e1.begin(), e1.end()) / s1;
    c.max_d2_dev = *std::max_element(e2.begin(), e2.end()) / s2;
    c.samples = samples;
    return c;
}

namespace {
bool slope_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& icpt) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (x.size() < 2 || !(std::abs(den) > 0)) return false;
    slope = (n * sxy - sx * sy) / den;
    icpt = (sy - slope * sx) / n;
    return true;
}
}  // namespace

ExponentFit iteration_exponent(const ExtremaSequence& seq, double deep) {
    // Pairs (log Phi_n, log Phi_{n-1}) over consecutive deep maxima.
    std::vector<double> x, y;
    for (std::size_t n = 1; n < seq.maxima.size(); ++n) {
        const double prev = seq.maxima[n - 1].phi, cur = seq.maxima[n].phi;
        if (prev >= deep && cur >= deep) {
            x.push_back(std::log(cur));
            y.push_back(std::log(prev));
        }
    }
    if (x.size() < 2) throw InsufficientData("need at least 2 consecutive pairs of deep maxima");
    ExponentFit f;
    f.pairs_used = int(x.size());
    slope_fit(x, y, f.exponent_max, f.log_c);

    // Minima lying between deep maxima.
    std::vector<double> mins;
    for (const auto& m : seq.minima) {
        bool between = false;
        for (std::size_t n = 1; n < seq.maxima.size(); ++n)
            if (seq.maxima[n - 1].phi >= deep && seq.maxima[n].phi >= deep && m.tau < seq.maxima[n - 1].tau &&
                m.tau > seq.maxima[n].tau)
                between = true;
        if (between && m.phi > 0) mins.push_back(std::log(m.phi));
    }
    if (mins.size() >= 3) {
        std::vector<double> mx(mins.begin() + 1, mins.end()), my(mins.begin(), mins.end() - 1);
        double s, c0;
        if (slope_fit(mx, my, s, c0)) f.exponent_min = s;
    }
    return f;
}

}  // namespace tfilm
