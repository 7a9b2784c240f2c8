#include "tfilm/bounce.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tfilm {

const char* to_string(Region r) {
    switch (r) {
        case Region::R1: return "R1";
        case Region::R2: return "R2";
        case Region::R3: return "R3";
        case Region::R4: return "R4";
        case Region::R5: return "R5";
        case Region::OnIsocline: return "OnIsocline";
    }
    return "?";
}

const char* to_string(SeparatrixKind k) { return k == SeparatrixKind::VBar ? "vbar" : "vhat"; }

PhasePoint pe_point() {
    const double u = std::cbrt(9.0 / 5.0);
    return {u, -u * u / 3.0};
}

namespace {
constexpr double kIsoTol = 1e-12;

void frozen_field(double, const Vec<2>& y, Vec<2>& dy) {
    const auto d = rhs_frozen_uv(y[0], y[1]);
    dy[0] = d[0];
    dy[1] = d[1];
}

void graph_field(double u, const Vec<1>& y, Vec<1>& dy) {
    const double v = y[0];
    dy[0] = (1.0 + 5.0 * u * v / 3.0) / (v + u * u / 3.0);
}

double asymptotic_small_v(double u) { return -1.0 / (2.0 * u) - 1.0 / (12.0 * u * u * u * u); }

void check_seed(double u, double tol) {
    // First neglected term relative to the leading one: |1/(12u^4)| / |1/(2u)|.
    const double rel = 1.0 / (6.0 * std::abs(u * u * u));
    if (!(rel <= tol))
        throw SeedOutOfAsymptoticRange("seed |u| = " + std::to_string(std::abs(u)) +
                                       " too small for the asymptotic branch");
}

double bisect_u(const Trajectory<2>& tr, double target) {
    // u is monotone along tr; find z with u(z) = target.
    double a = tr.t_begin(), b = tr.t_end();
    double fa = tr.eval(a)[0] - target;
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double fm = tr.eval(m)[0] - target;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}
}  // namespace

bool in_r4(const PhasePoint& p) {
    const double u = p.u, v = p.v;
    if (u < 0) return -u * u / 3.0 < v && v < -3.0 / (5.0 * u);
    if (u > 0) return v > std::max(-u * u / 3.0, -3.0 / (5.0 * u));
    return v > 0;
}

Region classify_region(const PhasePoint& p) {
    const auto d = rhs_frozen_uv(p.u, p.v);
    const double s1 = std::abs(p.v) + p.u * p.u / 3.0;
    const double s2 = 1.0 + 5.0 * std::abs(p.u * p.v) / 3.0;
    if (std::abs(d[0]) <= kIsoTol * std::max(1.0, s1) || std::abs(d[1]) <= kIsoTol * s2) return Region::OnIsocline;
    if (d[0] > 0 && d[1] > 0) return Region::R4;
    if (d[0] > 0) return p.u < 0 ? Region::R5 : Region::R3;
    return d[1] > 0 ? Region::R1 : Region::R2;
}

Trajectory<2> frozen_orbit(const PhasePoint& p, double z_end, const std::vector<Event<2>>& events,
                           const IntegratorConfig& cfg) {
    return integrate<2>(frozen_field, Vec<2>{p.u, p.v}, 0.0, z_end, events, cfg);
}

EigPe eig_pe() {
    EigPe e;
    e.pe = pe_point();
    const Mat2 j = jacobian_frozen_uv(e.pe.u, e.pe.v);
    Eigen::Matrix2d J;
    J << j[0][0], j[0][1], j[1][0], j[1][1];
    Eigen::EigenSolver<Eigen::Matrix2d> es(J);
    auto l0 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
    if (l0.imag() < l1.imag()) std::swap(l0, l1);
    e.lambda_plus = l0;
    e.lambda_minus = l1;
    e.real_part = l0.real();
    e.trace = J.trace();
    const double k = std::cbrt(1.0 / 15.0);
    const std::complex<double> cp(3.5 * k, 0.5 * std::sqrt(11.0) * k);
    e.closed_form_gap = std::max(std::abs(l0 - cp), std::abs(l1 - std::conj(cp)));
    const PhasePoint pc{std::cbrt(9.0 / 5.0), -std::cbrt(81.0 / 25.0) / 3.0};
    e.closed_form_gap = std::max({e.closed_form_gap, std::abs(e.pe.u - pc.u), std::abs(e.pe.v - pc.v)});
    return e;
}

SeparatrixTable compute_separatrix(SeparatrixKind kind, std::pair<double, double> u_range, int n,
                                   const SeparatrixConfig& cfg) {
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (!(u_range.first < u_range.second)) throw std::invalid_argument("empty u range");
    SeparatrixTable t;
    t.kind = kind;

    if (kind == SeparatrixKind::VBar) {
        // The branch is attracting for increasing z (increasing u), so it is
        // pinned by integrating the graph equation from the u -> -inf asymptote.
        const double u0 = std::min(-cfg.seed_u, u_range.first);
        check_seed(u0, cfg.seed_rel_correction);
        if (u_range.second > 0 && u_range.first < u0) throw std::invalid_argument("u range below seed");
        Event<1> sing;
        sing.kind = EventKind::Custom;
        sing.label = "gamma1";
        sing.direction = Direction::Falling;
        sing.guard = [](double u, const Vec<1>& y) { return y[0] + u * u / 3.0; };
        auto tr = integrate<1>(graph_field, Vec<1>{asymptotic_small_v(u0)}, u0, u_range.second, {sing}, cfg.integ);
        if (tr.status != Status::Completed) throw std::runtime_error("vbar integration stopped early");
        t.u_range = u_range;
        t.samples.resize(n);
        for (int i = 0; i < n; ++i) {
            const double u = i == n - 1 ? u_range.second : u_range.first + (u_range.second - u_range.first) * i / (n - 1);
            t.samples[i] = {u, u == u0 ? tr.y.front()[0] : tr.eval(u)[0]};
        }
        return t;
    }

    // vhat: from the u -> +inf asymptote backward in z towards p_e.
    const double u0 = std::max(cfg.seed_u, u_range.second);
    check_seed(u0, cfg.seed_rel_correction);
    const PhasePoint seed{u0, asymptotic_small_v(u0)};
    Event<2> turn;
    turn.kind = EventKind::Custom;
    turn.label = "gamma1";
    turn.direction = Direction::Falling;
    turn.guard = [](double, const Vec<2>& y) { return y[1] + y[0] * y[0] / 3.0; };
    const auto mono = frozen_orbit(seed, -200.0, {turn}, cfg.integ);
    const double u_turn = mono.back()[0];
    t.u_range = {std::max(u_range.first, u_turn), u_range.second};
    if (!(t.u_range.first < t.u_range.second)) throw std::invalid_argument("u range outside the graph part of vhat");
    t.samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double u = t.u_range.first + (t.u_range.second - t.u_range.first) * i / (n - 1);
        t.samples[i] = {u, mono.eval(bisect_u(mono, u))[1]};
    }
    t.samples.back().u = t.u_range.second;

    // Decay to p_e in the complex eigen-coordinate, where |c(z)| = |c0| e^{Re(lambda) z}.
    const EigPe e = eig_pe();
    const Mat2 j = jacobian_frozen_uv(e.pe.u, e.pe.v);
    Eigen::Matrix2d J;
    J << j[0][0], j[0][1], j[1][0], j[1][1];
    Eigen::EigenSolver<Eigen::Matrix2d> es(J);
    Eigen::Matrix2cd R = es.eigenvectors();
    Eigen::Matrix2cd L = R.inverse();
    const int ip = es.eigenvalues()[0].imag() > 0 ? 0 : 1;

    Event<2> close;
    close.kind = EventKind::Custom;
    close.label = "near_pe";
    close.direction = Direction::Falling;
    close.guard = [pe = e.pe](double, const Vec<2>& y) { return std::hypot(y[0] - pe.u, y[1] - pe.v) - 1e-11; };
    const auto full = frozen_orbit(seed, -200.0, {close}, cfg.integ);
    std::vector<double> zs, lc;
    for (std::size_t i = 0; i < full.t.size(); ++i) {
        const double du = full.y[i][0] - e.pe.u, dv = full.y[i][1] - e.pe.v;
        const double d = std::hypot(du, dv);
        t.pe_decay.emplace_back(full.t[i], d);
        const std::complex<double> c = L(ip, 0) * du + L(ip, 1) * dv;
        if (d <= 1e-4 && d >= 1e-10) {
            zs.push_back(full.t[i]);
            lc.push_back(std::log(std::abs(c)));
        }
    }
    t.pe_distance = t.pe_decay.back().second;
    if (zs.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = double(zs.size());
        for (std::size_t i = 0; i < zs.size(); ++i) {
            sx += zs[i];
            sy += lc[i];
            sxx += zs[i] * zs[i];
            sxy += zs[i] * lc[i];
        }
        t.pe_rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return t;
}

double separatrix_at(const SeparatrixTable& t, double u) {
    const auto& s = t.samples;
    if (s.empty() || u < s.front().u || u > s.back().u) throw RangeError("u outside separatrix table");
    auto it = std::lower_bound(s.begin(), s.end(), u, [](const PhasePoint& p, double x) { return p.u < x; });
    if (it == s.begin()) return it->v;
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.v + (b.v - a.v) * (u - a.u) / (b.u - a.u);
}

Vec3 matching_seed(double K, double s) {
    const double k3 = K * K * K;
    return {-K * s - std::log(std::abs(s)) / (2.0 * k3), -K - 1.0 / (2.0 * k3 * s), 1.0 / (2.0 * k3 * s * s)};
}

std::pair<double, double> default_matching_range(double K) {
    const double k4 = K * K * K * K;
    return {-1e3 / k4, 1e3 / k4};
}

MatchingResult matching_solution(double K, std::pair<double, double> s_range, const IntegratorConfig& cfg) {
    if (!(K > 0)) throw std::invalid_argument("K must be positive");
    const double s0 = s_range.first, s1 = s_range.second;
    if (!(s0 < 0 && s1 > 0)) throw std::invalid_argument("s range must straddle the bounce");
    const double k4 = K * K * K * K;
    if (k4 * std::abs(s0) < 100.0) throw SeedOutOfAsymptoticRange("incoming seed not deep enough: K^4|s| < 100");

    Event<3> zero;
    zero.kind = EventKind::Touchdown;
    zero.label = "h_zero";
    zero.direction = Direction::Falling;
    zero.guard = [](double, const Vec3& y) { return y[0]; };
    MatchingResult r;
    r.trajectory = integrate<3>([](double, const Vec3& y, Vec3& dy) { dy = rhs_inner_h(y); },
                                matching_seed(K, s0), s0, s1, {zero}, cfg);
    const auto& tr = r.trajectory;
    if (tr.status != Status::Completed) throw FitFailure("matching run did not reach the end of the range");

    std::size_t imin = 0;
    for (std::size_t i = 1; i < tr.t.size(); ++i)
        if (tr.y[i][0] < tr.y[imin][0]) imin = i;
    const double hmin = tr.y[imin][0];
    // Window: h >= 100 h_min and h'' drifting by less than 1% per decade of s.
    double sw = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = imin; i < tr.t.size(); ++i) {
        const double s = tr.t[i];
        if (s <= 0 || tr.y[i][0] < 100.0 * hmin) continue;
        const double s10 = std::min(10.0 * s, s1);
        if (s10 <= s) break;
        const double g = tr.y[i][2], g10 = tr.eval(s10)[2];
        const double decades = std::log10(s10 / s);
        if (decades >= 0.5 && std::abs(g10 - g) <= 0.01 * std::abs(g) * decades) {
            sw = s;
            break;
        }
    }
    if (!(sw == sw) || s1 < 2.0 * sw) throw FitFailure("outgoing window shows no quadratic regime");

    const int n = 200;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
        const double s = sw + (s1 - sw) * i / (n - 1);
        const double h = tr.eval(s)[0];
        const double x = s / s1;
        // Relative weighting by 1/h.
        X(i, 0) = x * x / h;
        X(i, 1) = x / h;
        X(i, 2) = 1.0 / h;
        Y(i) = 1.0;
    }
    const Eigen::Vector3d c = X.colPivHouseholderQr().solve(Y);
    const Eigen::VectorXd res = X * c - Y;
    r.constants.amplitude_A = c(0) / (s1 * s1);
    r.constants.incoming_slope_K = K;
    r.constants.gamma_out = r.constants.amplitude_A / (k4 * K);
    r.constants.fit_residual = std::sqrt(res.squaredNorm() / n);
    r.constants.fit_window = {sw, s1};
    if (!(r.constants.amplitude_A > 0)) throw FitFailure("non-positive outgoing amplitude");
    return r;
}

}  // namespace tfilm
