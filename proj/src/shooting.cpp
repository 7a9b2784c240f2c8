#include "tfilm/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace tfilm {

Vec4 v1_tilde() { return {std::pow(3.0, -2.0 / 3.0), -std::pow(3.0, -1.0 / 3.0), 1.0, 0.0}; }
Vec4 v4_tilde() { return {0.0, 0.0, 0.0, 1.0}; }

CompactState seed_state(const ManifoldSeed& seed, double delta0) {
    if (!(std::abs(seed.nu) <= delta0) || !(std::abs(seed.sigma) <= delta0))
        throw BoxViolation("seed outside the box |nu|, |sigma| <= delta0");
    const Vec4 v1 = v1_tilde();
    CompactState s;
    s.phi = 1.0 + seed.nu * v1[0];
    s.w = seed.nu * v1[1];
    s.psi = seed.nu * v1[2];
    s.theta = seed.sigma == 0.0 ? kHalfPi : std::min(kHalfPi, kHalfPi + seed.sigma);
    return s;
}

double linf_bound(double xi, double a) {
    const double aa = std::abs(a);
    const double x2 = xi * xi;
    if (x2 < -2.0 * a) return std::pow(24.0 / 5.0, 3) * std::pow(aa, 5) * (1.0 + 3.0 * aa);
    if (x2 > -2.0 * a) return 16.0 * (2.0 + aa);
    return std::numeric_limits<double>::infinity();
}

std::optional<ShootTrigger> linf_certificate(const PhysState& s, const ModelParams& p, double margin) {
    if (!(s.dh < 0 && s.d2h > 0)) return std::nullopt;
    const double A = s.xi * s.xi + 1.0 + std::abs(p.a);
    const double h3a = s.h * s.h * s.h * A;
    const double bound = margin * linf_bound(s.xi, p.a);
    if (!(h3a > bound)) return std::nullopt;
    ShootTrigger t;
    t.criterion = "Linf";
    t.xi0 = s.xi;
    t.h3a = h3a;
    t.threshold = bound;
    t.dh = s.dh;
    t.d2h = s.d2h;
    return t;
}

std::optional<ShootTrigger> lext_certificate(const PhysState& s, const ModelParams& p, double margin) {
    if (!(s.dh > 0 && s.d2h < 0)) return std::nullopt;
    const double aa = std::abs(p.a);
    const double A = s.xi * s.xi + 1.0 + aa;
    const double A5 = std::pow(std::abs(s.xi) + 1.0 + aa, 5.0 / 3.0);
    // Tightest admissible choice: c2 = H^3 A, c3 -> A5 H'. The smallness
    // condition then reads c2^{1/3} A^{4/3} / c3 < 1/10.
    const double c2 = s.h * s.h * s.h * A;
    const double c3 = A5 * s.dh;
    const double ratio = std::cbrt(c2) * std::pow(A, 4.0 / 3.0) / c3;
    const double bound = 0.1 / margin;
    if (!(ratio < bound)) return std::nullopt;
    ShootTrigger t;
    t.criterion = "Lext";
    t.xi0 = s.xi;
    t.h3a = c2;
    t.threshold = bound;
    t.dh = s.dh;
    t.d2h = s.d2h;
    return t;
}

ShootOutcome classify_from(const CompactState& x0, double tau0, const ModelParams& p, double horizon,
                           const ShootConfig& cfg) {
    std::vector<Event<4>> ev(2);
    ev[0].kind = EventKind::Touchdown;
    ev[0].label = "eps_touch";
    ev[0].direction = Direction::Falling;
    ev[0].guard = [e = cfg.eps_touch](double, const Vec4& y) { return y[0] - e; };
    ev[1].kind = EventKind::BlowUp;
    ev[1].label = "phi_max";
    ev[1].direction = Direction::Rising;
    ev[1].guard = [m = cfg.phi_max](double, const Vec4& y) { return y[0] - m; };

    std::optional<ShootTrigger> cert;
    Verdict cert_verdict = Verdict::Undetermined;
    auto observer = [&](double t, const Vec4& y) {
        if (slice_of(y[3]) != 0 || !(std::abs(y[3]) < kHalfPi) || !(y[0] > 0)) return false;
        const PhysState s = phys_of_compact(compact_from(y));
        if (auto c = linf_certificate(s, p, cfg.cert_margin)) {
            cert = c;
            cert->tau = t;
            cert->phi = y[0];
            cert_verdict = Verdict::BlowUp;
            return true;
        }
        if (auto c = lext_certificate(s, p, cfg.cert_margin)) {
            cert = c;
            cert->tau = t;
            cert->phi = y[0];
            cert_verdict = Verdict::Touchdown;
            return true;
        }
        return false;
    };
    auto f = [&p](double, const Vec4& y, Vec4& dy) { rhs_compact(y, p, dy); };

    ShootOutcome out;
    out.trajectory = integrate<4>(f, to_vec(x0), tau0, tau0 - horizon, ev, cfg.integ, observer);
    const auto& tr = out.trajectory;
    out.tau_end = tr.t_end();
    ShootTrigger trig;
    trig.tau = tr.t_end();
    trig.phi = tr.back()[0];
    if (std::abs(tr.back()[3]) < kHalfPi && slice_of(tr.back()[3]) == 0 && tr.back()[0] > 0)
        trig.xi0 = std::tan(tr.back()[3]);
    if (tr.status == Status::EventStopped && tr.terminal_event) {
        const auto& e = *tr.terminal_event;
        if (e.kind == EventKind::Touchdown) {
            out.verdict = Verdict::Touchdown;
            trig.criterion = "eps_touch";
        } else if (e.kind == EventKind::BlowUp) {
            out.verdict = Verdict::BlowUp;
            trig.criterion = "phi_max";
        } else if (cert) {
            out.verdict = cert_verdict;
            trig = *cert;
        }
    } else if (tr.status == Status::StepFailure) {
        out.verdict = Verdict::BlowUp;
        trig.criterion = "step_failure";
    } else if (tr.status == Status::StepLimit) {
        out.verdict = Verdict::Undetermined;
        trig.criterion = "step_limit";
    } else {
        out.verdict = Verdict::Undetermined;
        trig.criterion = "horizon";
    }
    out.trigger = trig;
    return out;
}

ShootOutcome classify_backward(const ManifoldSeed& seed, const ModelParams& p, double horizon,
                               const ShootConfig& cfg) {
    return classify_from(seed_state(seed, cfg.delta0), 0.0, p, horizon, cfg);
}

ShootOutcome classify_extending(const CompactState& x0, double tau0, const ModelParams& p,
                                const ShootConfig& cfg, double* horizon_used) {
    double h = cfg.horizon;
    ShootOutcome o;
    for (int k = 0; k <= cfg.horizon_doublings; ++k) {
        o = classify_from(x0, tau0, p, h, cfg);
        if (o.verdict != Verdict::Undetermined) break;
        if (k < cfg.horizon_doublings) h *= 2;
    }
    if (horizon_used) *horizon_used = h;
    return o;
}

namespace {

double separation(const Vec4& a, const Vec4& b) {
    double d = 0;
    for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i])));
    return d;
}

// Last tau (from the common start) up to which the two backward runs stay
// within `tol` of each other, sampled at the nodes of `a`.
double coherent_until(const Trajectory<4>& a, const Trajectory<4>& b, double tol) {
    const double bend = b.t_end();
    double last = a.t_begin();
    for (std::size_t i = 0; i < a.t.size(); ++i) {
        const double t = a.t[i];
        if (t < bend) break;
        if (separation(a.y[i], b.eval(t)) > tol) break;
        last = t;
    }
    return last;
}

}  // namespace

HeteroclinicResult find_heteroclinic(const ModelParams& p, double sigma, std::pair<double, double> nu_bracket,
                                     double tol, double horizon, const ShootConfig& cfg_in) {
    ShootConfig cfg = cfg_in;
    cfg.horizon = horizon;
    HeteroclinicResult res;

    auto probe_state = [&](const CompactState& x, double tau0, int stage, double param) {
        double h_used = 0;
        ShootOutcome o = classify_extending(x, tau0, p, cfg, &h_used);
        res.probes.push_back({stage, param, o.verdict, o.trigger, h_used});
        return o;
    };
    auto seed_of = [&](double nu) { return seed_state({nu, sigma}, cfg.delta0); };

    double na = nu_bracket.first, nb = nu_bracket.second;
    ShootOutcome oa = probe_state(seed_of(na), 0.0, 0, na);
    ShootOutcome ob = probe_state(seed_of(nb), 0.0, 0, nb);
    if (oa.verdict == Verdict::Undetermined || ob.verdict == Verdict::Undetermined ||
        oa.verdict == ob.verdict)
        throw BracketInvalid("bracket endpoints do not classify to opposite verdicts");
    // Normalise so that (na, oa) is the touchdown side.
    if (oa.verdict != Verdict::Touchdown) {
        std::swap(na, nb);
        std::swap(oa, ob);
    }
    res.blowup_above = nb > na;

    bool width_recorded = false;
    for (int it = 0; it < 400; ++it) {
        if (!width_recorded && std::abs(nb - na) <= tol) {
            res.bracket_width_at_tol = std::abs(nb - na);
            width_recorded = true;
        }
        const double nm = 0.5 * (na + nb);
        if (nm == na || nm == nb) break;
        const CompactState sm = seed_of(nm), sa = seed_of(na), sb = seed_of(nb);
        auto same = [](const CompactState& x, const CompactState& y) {
            return x.phi == y.phi && x.w == y.w && x.psi == y.psi && x.theta == y.theta;
        };
        if (width_recorded && (same(sm, sa) || same(sm, sb))) break;
        ShootOutcome om = probe_state(sm, 0.0, 0, nm);
        if (om.verdict == Verdict::Undetermined)
            throw HorizonExhausted("Undetermined probe at the horizon cap during nu bisection");
        if (om.verdict == Verdict::Touchdown) {
            na = nm;
            oa = std::move(om);
        } else {
            nb = nm;
            ob = std::move(om);
        }
    }
    if (!width_recorded) res.bracket_width_at_tol = std::abs(nb - na);
    res.bracket = {na, nb};
    res.nu_bar = 0.5 * (na + nb);

    const double theta_stop = -kHalfPi + cfg.theta_stop_gap;
    Trajectory<4> lo = std::move(oa.trajectory), hi = std::move(ob.trajectory);
    Trajectory<4> composite;
    int stage = 0;
    while (true) {
        double sep_tol = cfg.restart_separation;
        double tr = coherent_until(lo, hi, sep_tol);
        Trajectory<4> seg = lo;
        if (tr != seg.t_begin()) seg.truncate(tr);
        else {
            seg.t.resize(1);
            seg.y.resize(1);
            seg.step_t0.clear();
            seg.step_h.clear();
            seg.dense.clear();
        }
        if (composite.empty()) composite = seg;
        else {
            res.junctions.push_back(seg.t_begin());
            composite.append(seg);
        }
        const Vec4 xa = lo.eval(tr), xb = hi.eval(tr);
        if (xa[3] <= theta_stop) break;
        if (++stage > cfg.max_stages) break;
        if (tr == lo.t_begin() && stage > 1)
            throw HorizonExhausted("refinement stalled: bracket states separate immediately");

        auto mix = [&](double s) {
            Vec4 x;
            for (int i = 0; i < 4; ++i) x[i] = xa[i] + s * (xb[i] - xa[i]);
            return compact_from(x);
        };
        double sa = 0.0, sb = 1.0;
        ShootOutcome qa = probe_state(mix(sa), tr, stage, sa);
        ShootOutcome qb = probe_state(mix(sb), tr, stage, sb);
        if (qa.verdict != Verdict::Touchdown || qb.verdict != Verdict::BlowUp)
            throw HorizonExhausted("refinement endpoints lost their verdicts");
        for (int it = 0; it < 200; ++it) {
            const double sm = 0.5 * (sa + sb);
            const Vec4 xm = to_vec(mix(sm)), va = to_vec(mix(sa)), vb = to_vec(mix(sb));
            if (xm == va || xm == vb) break;
            ShootOutcome qm = probe_state(mix(sm), tr, stage, sm);
            if (qm.verdict == Verdict::Undetermined)
                throw HorizonExhausted("Undetermined probe at the horizon cap during refinement");
            if (qm.verdict == Verdict::Touchdown) {
                sa = sm;
                qa = std::move(qm);
            } else {
                sb = sm;
                qb = std::move(qm);
            }
        }
        lo = std::move(qa.trajectory);
        hi = std::move(qb.trajectory);
    }
    res.stages = stage;
    res.trajectory = std::move(composite);
    res.theta_end = res.trajectory.back()[3];
    return res;
}

namespace {
// Fornberg weights for the first derivative at x0 on arbitrary nodes.
std::vector<double> d1_weights(const std::vector<double>& x, double x0) {
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}
}  // namespace

double original_residual(const std::vector<PhysState>& stencil, std::size_t centre, const ModelParams& p) {
    std::vector<double> x(stencil.size());
    for (std::size_t j = 0; j < stencil.size(); ++j) x[j] = stencil[j].xi;
    const std::vector<double> w = d1_weights(x, x[centre]);
    double h3 = 0;
    for (std::size_t j = 0; j < stencil.size(); ++j) h3 += w[j] * stencil[j].d2h;
    const PhysState& sc = stencil[centre];
    return (h3 + sc.xi * sc.xi + p.a) * sc.h * sc.h * sc.h - 1.0;
}

ProfileCheck heteroclinic_profile(const HeteroclinicResult& r, const ModelParams& p) {
    ProfileCheck pc;
    pc.compact = r.trajectory;
    const auto& tr = r.trajectory;
    pc.phi_min = std::numeric_limits<double>::infinity();
    pc.phi_max = 0;
    // Segment index per node; a junction node carries the restarted state and
    // opens the next segment.
    std::vector<int> seg(tr.t.size(), 0);
    std::size_t jn = 0;
    int cur = 0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        while (jn < r.junctions.size() && tr.t[i] == r.junctions[jn]) {
            ++cur;
            ++jn;
        }
        seg[i] = cur;
    }
    std::vector<std::size_t> node;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const CompactState c = compact_from(tr.y[i]);
        pc.phi_min = std::min(pc.phi_min, c.phi);
        pc.phi_max = std::max(pc.phi_max, c.phi);
        if (slice_of(c.theta) != 0) continue;
        pc.tau.push_back(tr.t[i]);
        pc.phys.push_back(phys_of_compact(c));
        node.push_back(i);
    }
    auto ratio = [](const PhysState& s) { return std::pow(std::abs(s.xi), 2.0 / 3.0) * s.h; };
    if (!pc.phys.empty()) {
        pc.tail_ratio_start = ratio(pc.phys.front());
        pc.tail_ratio_end = ratio(pc.phys.back());
    }
    // Seven consecutive nodes of one segment. A segment's last node is
    // overwritten by the next restart, so it only enters through the next one.
    const std::size_t half = 3;
    double worst = 0;
    std::vector<PhysState> st(2 * half + 1);
    for (std::size_t k = half; k + half < pc.phys.size(); ++k) {
        const std::size_t i0 = node[k - half], i1 = node[k + half];
        if (i1 - i0 != 2 * half || seg[i0] != seg[i1]) continue;
        for (std::size_t j = 0; j < st.size(); ++j) st[j] = pc.phys[k - half + j];
        const double r0 = std::abs(original_residual(st, half, p));
        worst = std::isfinite(r0) ? std::max(worst, r0) : std::numeric_limits<double>::infinity();
        ++pc.residual_samples;
    }
    pc.max_residual = worst;
    return pc;
}

}  // namespace tfilm
