#pragma once

// Dormand-Prince 5(4) with the Hairer/Wanner continuous extension.
// Integrates forward or backward; terminal events are located by bisection
// on the dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfilm {

template <std::size_t N>
using Vec = std::array<double, N>;

struct IntegratorConfig {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 0.0;  // 0: use 1e-13 * |span|
    long max_steps = 10'000'000;
    double first_step = 0.0;  // 0: automatic
    double event_tol = 1e-12;
    int event_max_iter = 50;
};

enum class EventKind { Touchdown, BlowUp, ThetaReached, Custom };
// Direction is taken along the traversal, so "Falling" on a backward run
// means the guard decreases as |t - t0| grows.
enum class Direction { Rising, Falling, Any };

template <std::size_t N>
struct Event {
    EventKind kind = EventKind::Custom;
    std::function<double(double, const Vec<N>&)> guard;
    Direction direction = Direction::Any;
    bool terminal = true;
    std::string label;
};

struct EventHit {
    EventKind kind = EventKind::Custom;
    std::string label;
    double t = 0.0;
};

enum class Status { Completed, EventStopped, StepFailure, StepLimit };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Completed: return "Completed";
        case Status::EventStopped: return "EventStopped";
        case Status::StepFailure: return "StepFailure";
        case Status::StepLimit: return "StepLimit";
    }
    return "?";
}

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Touchdown: return "Touchdown";
        case EventKind::BlowUp: return "BlowUp";
        case EventKind::ThetaReached: return "ThetaReached";
        case EventKind::Custom: return "Custom";
    }
    return "?";
}

class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

template <std::size_t N>
struct Trajectory {
    std::vector<double> t;
    std::vector<Vec<N>> y;
    // Per step i (covering t[i]..t[i+1]): step start, full step length and
    // the five continuous-extension coefficient vectors.
    std::vector<double> step_t0;
    std::vector<double> step_h;
    std::vector<std::array<Vec<N>, 5>> dense;
    std::optional<EventHit> terminal_event;
    std::vector<EventHit> events;  // non-terminal crossings
    Status status = Status::Completed;
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;

    bool empty() const { return t.empty(); }
    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    const Vec<N>& back() const { return y.back(); }
    bool forward() const { return t.size() < 2 || t.back() >= t.front(); }

    std::size_t locate(double tq) const {
        const double lo = std::min(t.front(), t.back());
        const double hi = std::max(t.front(), t.back());
        if (!(tq >= lo - 1e-14 * (1 + std::abs(lo)) && tq <= hi + 1e-14 * (1 + std::abs(hi))))
            throw RangeError("dense_eval outside trajectory span");
        if (t.size() < 2) return 0;
        std::size_t i;
        if (forward()) {
            auto it = std::upper_bound(t.begin(), t.end(), tq);
            i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
        } else {
            auto it = std::upper_bound(t.begin(), t.end(), tq, [](double a, double b) { return a > b; });
            i = it == t.begin() ? 0 : std::size_t(it - t.begin()) - 1;
        }
        return std::min(i, dense.size() - 1);
    }

    Vec<N> eval(double tq) const {
        if (t.size() == 1) {
            if (tq != t.front()) throw RangeError("dense_eval outside trajectory span");
            return y.front();
        }
        return eval_step(locate(tq), tq);
    }

    Vec<N> eval_step(std::size_t i, double tq) const {
        const auto& r = dense[i];
        const double s = (tq - step_t0[i]) / step_h[i];
        const double s1 = 1.0 - s;
        Vec<N> out;
        for (std::size_t k = 0; k < N; ++k)
            out[k] = r[0][k] + s * (r[1][k] + s1 * (r[2][k] + s * (r[3][k] + s1 * r[4][k])));
        return out;
    }

    // Drop everything past tq (tq inside the span); the last step keeps its
    // coefficients so the interpolant is unchanged up to tq.
    void truncate(double tq) {
        std::size_t i = locate(tq);
        Vec<N> yq = eval_step(i, tq);
        t.resize(i + 1);
        y.resize(i + 1);
        step_t0.resize(i + 1);
        step_h.resize(i + 1);
        dense.resize(i + 1);
        if (t.back() != tq) {
            t.push_back(tq);
            y.push_back(yq);
        } else {
            step_t0.pop_back();
            step_h.pop_back();
            dense.pop_back();
        }
    }

    // Concatenate a trajectory that starts where this one ends. The state
    // may jump at the junction; each step keeps its own interpolant.
    void append(const Trajectory& other) {
        if (other.t.empty()) return;
        if (t.empty()) {
            *this = other;
            return;
        }
        y.back() = other.y.front();
        for (std::size_t i = 1; i < other.t.size(); ++i) {
            t.push_back(other.t[i]);
            y.push_back(other.y[i]);
        }
        step_t0.insert(step_t0.end(), other.step_t0.begin(), other.step_t0.end());
        step_h.insert(step_h.end(), other.step_h.begin(), other.step_h.end());
        dense.insert(dense.end(), other.dense.begin(), other.dense.end());
        terminal_event = other.terminal_event;
        status = other.status;
        accepted += other.accepted;
        rejected += other.rejected;
        rhs_evals += other.rhs_evals;
    }
};

template <std::size_t N>
Vec<N> dense_eval(const Trajectory<N>& traj, double t) {
    return traj.eval(t);
}

// Called after every accepted step with the new (t, y); returning true stops
// the run with status EventStopped.
template <std::size_t N>
using StepObserver = std::function<bool(double, const Vec<N>&)>;

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp5

namespace detail {
template <std::size_t N>
bool all_finite(const Vec<N>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool crosses(double g0, double g1, Direction d) {
    const bool rising = g0 < 0 && g1 >= 0;
    const bool falling = g0 > 0 && g1 <= 0;
    switch (d) {
        case Direction::Rising: return rising;
        case Direction::Falling: return falling;
        case Direction::Any: return rising || falling;
    }
    return false;
}
}  // namespace detail

// F: void(double t, const Vec<N>& y, Vec<N>& dydt)
template <std::size_t N, class F>
Trajectory<N> integrate(F&& f, const Vec<N>& y0, double t0, double t1,
                        const std::vector<Event<N>>& events, const IntegratorConfig& cfg,
                        const StepObserver<N>& observer = {}) {
    using namespace dp5;
    if (t0 == t1) throw std::invalid_argument("integrate: empty span");
    const double span = std::abs(t1 - t0);
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double hmin = cfg.min_step > 0 ? cfg.min_step : 1e-13 * span;
    const double hmax = std::min(cfg.max_step, span);

    Trajectory<N> tr;
    tr.t.push_back(t0);
    tr.y.push_back(y0);

    Vec<N> y = y0, k1, k2, k3, k4, k5, k6, k7, ys, ynew;
    f(t0, y, k1);
    tr.rhs_evals = 1;

    auto norm = [&](const Vec<N>& e, const Vec<N>& ya, const Vec<N>& yb) {
        double s = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double q = e[i] / sk;
            s += q * q;
        }
        return std::sqrt(s / N);
    };

    double h;
    if (cfg.first_step > 0) {
        h = std::min(cfg.first_step, hmax);
    } else {
        // Initial step heuristic (Hairer, Norsett, Wanner II.4).
        auto wnorm = [&](const Vec<N>& v) {
            double s = 0;
            for (std::size_t i = 0; i < N; ++i) {
                const double q = v[i] / (cfg.abs_tol + cfg.rel_tol * std::abs(y[i]));
                s += q * q;
            }
            return std::sqrt(s / N);
        };
        const double d0 = wnorm(y), d1n = wnorm(k1);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, hmax);
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + dir * h0 * k1[i];
        f(t0 + dir * h0, ys, k2);
        ++tr.rhs_evals;
        Vec<N> dk;
        for (std::size_t i = 0; i < N; ++i) dk[i] = k2[i] - k1[i];
        double d2 = wnorm(dk) / h0;
        if (!std::isfinite(d2)) d2 = 1e10;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100 * h0, h1, hmax});
    }
    h = std::max(h, hmin);

    std::vector<double> gprev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].guard(t0, y);

    double t = t0;
    bool reject = false;
    long nsteps = 0;
    while (true) {
        if (nsteps >= cfg.max_steps) {
            tr.status = Status::StepLimit;
            break;
        }
        bool last = false;
        if (std::abs(t1 - t) <= h * (1 + 1e-12)) {
            h = std::abs(t1 - t);
            last = true;
        }
        const double hs = dir * h;
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * a21 * k1[i];
        f(t + c2 * hs, ys, k2);
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hs, ys, k3);
        for (std::size_t i = 0; i < N; ++i) ys[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hs, ys, k4);
        for (std::size_t i = 0; i < N; ++i)
            ys[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hs, ys, k5);
        for (std::size_t i = 0; i < N; ++i)
            ys[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double tn = last ? t1 : t + hs;
        f(tn, ys, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(tn, ynew, k7);
        tr.rhs_evals += 6;
        ++nsteps;

        Vec<N> err;
        for (std::size_t i = 0; i < N; ++i)
            err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double en = norm(err, y, ynew);
        if (!std::isfinite(en) || !detail::all_finite(ynew) || !detail::all_finite(k7)) en = 1e10;

        if (en > 1.0) {
            ++tr.rejected;
            const double fac = en >= 1e10 ? 0.2 : std::max(0.2, 0.9 * std::pow(en, -0.2));
            h *= fac;
            reject = true;
            if (h < hmin) {
                tr.status = Status::StepFailure;
                break;
            }
            continue;
        }

        // Accepted: build the interpolant.
        std::array<Vec<N>, 5> rc;
        for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = hs * k1[i] - ydiff;
            rc[0][i] = y[i];
            rc[1][i] = ydiff;
            rc[2][i] = bspl;
            rc[3][i] = ydiff - hs * k7[i] - bspl;
            rc[4][i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        tr.step_t0.push_back(t);
        tr.step_h.push_back(hs);
        tr.dense.push_back(rc);
        ++tr.accepted;

        // Event scan over this step.
        std::optional<std::size_t> hit;
        double thit = tn;
        std::vector<double> gnew(events.size());
        for (std::size_t e = 0; e < events.size(); ++e) {
            gnew[e] = events[e].guard(tn, ynew);
            if (!detail::crosses(gprev[e], gnew[e], events[e].direction)) continue;
            const std::size_t si = tr.dense.size() - 1;
            auto g = [&](double tq) {
                auto yq = tr.eval_step(si, tq);
                return events[e].guard(tq, yq);
            };
            double a = t, b = tn, ga = gprev[e];
            for (int it = 0; it < cfg.event_max_iter && std::abs(b - a) > cfg.event_tol; ++it) {
                const double m = 0.5 * (a + b);
                const double gm = g(m);
                if (detail::crosses(ga, gm, Direction::Any) || gm == 0) {
                    b = m;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            const double te = b;
            if (!events[e].terminal) {
                tr.events.push_back({events[e].kind, events[e].label, te});
                continue;
            }
            if (!hit || dir * (te - thit) < 0) {
                hit = e;
                thit = te;
            }
        }
        if (hit) {
            const std::size_t si = tr.dense.size() - 1;
            tr.t.push_back(thit);
            tr.y.push_back(tr.eval_step(si, thit));
            tr.terminal_event = EventHit{events[*hit].kind, events[*hit].label, thit};
            tr.status = Status::EventStopped;
            break;
        }
        gprev = std::move(gnew);

        t = tn;
        y = ynew;
        k1 = k7;
        tr.t.push_back(t);
        tr.y.push_back(y);

        if (observer && observer(t, y)) {
            tr.terminal_event = EventHit{EventKind::Custom, "observer", t};
            tr.status = Status::EventStopped;
            break;
        }
        if (last) {
            tr.status = Status::Completed;
            break;
        }

        double fac = 0.9 * std::pow(std::max(en, 1e-30), -0.2);
        fac = std::clamp(fac, 0.2, reject ? 1.0 : 10.0);
        h = std::min(h * fac, hmax);
        reject = false;
        if (h < hmin) {
            tr.status = Status::StepFailure;
            break;
        }
    }
    return tr;
}

}  // namespace tfilm
