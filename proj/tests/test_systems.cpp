#include "doctest.h"
#include "gen.hpp"

#include "tfilm/integrate.hpp"
#include "tfilm/systems.hpp"

#include <cmath>

using namespace tfilm;

TEST_CASE("original equation examples") {
    const Vec3 d = rhs_original({0.0, 1.0, 0.5, -0.25}, {0.0});
    CHECK(d[0] == 0.5);
    CHECK(d[1] == -0.25);
    CHECK(d[2] == 1.0);
    // Balance H^3 (xi^2 + a) = 1 kills the third derivative.
    for (double xi : {0.5, 1.0, 3.0}) {
        const double a = 2.0;
        const double h = std::cbrt(1.0 / (xi * xi + a));
        CHECK(std::abs(rhs_original({xi, h, 0, 0}, {a})[2]) < 1e-14);
    }
}

TEST_CASE("compact system equilibria and examples") {
    for (double a : {-2.0, 0.0, 1.0}) {
        const Vec4 up = rhs_compact(CompactState{1, 0, 0, kHalfPi}, {a});
        const Vec4 dn = rhs_compact(CompactState{1, 0, 0, -kHalfPi}, {a});
        for (int k = 0; k < 4; ++k) {
            CHECK(up[k] == 0.0);
            CHECK(dn[k] == 0.0);
        }
        // At theta = 0 with (1,0,0) only the (a - 1) term survives.
        CHECK(rhs_compact(CompactState{1, 0, 0, 0}, {a})[2] == doctest::Approx(1.0 - a).epsilon(1e-15));
        CHECK(rhs_compact(CompactState{1, 0, 0, 0}, {a})[3] == 1.0);
    }
}

TEST_CASE("slice dynamics equal the limit system exactly") {
    testgen::Gen g(21);
    for (int k = 0; k < 200; ++k) {
        const LimitState l{g.log_uniform(1e-2, 1e2), g.uniform(-3, 3), g.uniform(-3, 3)};
        const double th = g.sign() * kHalfPi;
        const Vec4 c = rhs_compact(CompactState{l.phi, l.w, l.psi, th}, {g.uniform(-3, 3)});
        const Vec3 s = rhs_limit(l);
        CHECK(c[0] == s[0]);
        CHECK(c[1] == s[1]);
        CHECK(c[2] == s[2]);
        CHECK(c[3] == 0.0);
    }
}

TEST_CASE("compact F-term agrees with its xi form") {
    testgen::Gen g(22);
    for (int k = 0; k < 300; ++k) {
        const double th = g.uniform(-1.5, 1.5);
        const double phi = g.log_uniform(1e-1, 1e1), w = g.uniform(-2, 2), psi = g.uniform(-2, 2);
        const double a = g.uniform(-2, 2);
        const Vec4 d = rhs_compact(CompactState{phi, w, psi, th}, {a});
        const double xi = std::tan(th), c = std::cos(th);
        const double f = 1.0 / (phi * phi * phi) - 1.0 - (a - 1.0) * c * c - d[2];
        const double ref = f_terms_xi(xi, phi, w, psi);
        CHECK(std::abs(f - ref) <= 1e-10 * (1 + std::abs(ref)));
        CHECK(d[3] == doctest::Approx(std::pow(c, 26.0 / 9.0)).epsilon(1e-13));
    }
}

TEST_CASE("limit system and its Jacobian") {
    const Vec3 d = rhs_limit({2.0, 0.5, -1.0});
    CHECK(d[0] == 0.5);
    CHECK(d[1] == -1.0);
    CHECK(d[2] == -0.875);
    CHECK(rhs_limit({0.5, 0, 0})[2] > rhs_limit({0.6, 0, 0})[2]);
    testgen::Gen g(23);
    for (int k = 0; k < 50; ++k) {
        const LimitState s{g.log_uniform(0.2, 5), g.uniform(-1, 1), g.uniform(-1, 1)};
        const Mat3 J = jacobian_limit(s);
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6;
            LimitState p = s, m = s;
            (j == 0 ? p.phi : j == 1 ? p.w : p.psi) += h;
            (j == 0 ? m.phi : j == 1 ? m.w : m.psi) -= h;
            const Vec3 fp = rhs_limit(p), fm = rhs_limit(m);
            for (int i = 0; i < 3; ++i) {
                const double fd = (fp[i] - fm[i]) / (2 * h);
                CHECK(std::abs(fd - J[i][j]) <= 1e-6 * (1 + std::abs(J[i][j])));
            }
        }
    }
}

TEST_CASE("frozen bounce field") {
    const double ue = std::cbrt(9.0 / 5.0), ve = -ue * ue / 3.0;
    const auto e = rhs_frozen_uv(ue, ve);
    CHECK(std::abs(e[0]) < 1e-15);
    CHECK(std::abs(e[1]) < 1e-15);
    const auto o = rhs_frozen_uv(0, 0);
    CHECK(o[0] == 0.0);
    CHECK(o[1] == 1.0);
    testgen::Gen g(24);
    for (int k = 0; k < 50; ++k) {
        const double u = g.uniform(-3, 3), v = g.uniform(-3, 3), h = 1e-6;
        const Mat2 J = jacobian_frozen_uv(u, v);
        const auto pu = rhs_frozen_uv(u + h, v), mu = rhs_frozen_uv(u - h, v);
        const auto pv = rhs_frozen_uv(u, v + h), mv = rhs_frozen_uv(u, v - h);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs((pu[i] - mu[i]) / (2 * h) - J[i][0]) < 1e-6 * (1 + std::abs(J[i][0])));
            CHECK(std::abs((pv[i] - mv[i]) / (2 * h) - J[i][1]) < 1e-6 * (1 + std::abs(J[i][1])));
        }
    }
}

TEST_CASE("full and frozen bounce differ by O(H^3)") {
    const BounceState b{1e-4, 0.7, -0.3, 0.0, 1.5};
    const Vec4 full = rhs_bounce(b, {1.0}, BounceMode::Full);
    const Vec4 frz = rhs_bounce(b, {1.0}, BounceMode::Frozen);
    CHECK(full[0] == frz[0]);
    CHECK(full[1] == frz[1]);
    CHECK(std::abs(full[2] - frz[2]) == doctest::Approx(3.25e-12).epsilon(1e-12));
    const auto uv = rhs_frozen_uv(b.u, b.v);
    CHECK(frz[1] == uv[0]);
    CHECK(frz[2] == uv[1]);
}

TEST_CASE("inner equation") {
    CHECK(rhs_inner_h({1.0, 0.0, 0.0})[2] == 1.0);
    CHECK(rhs_inner_h({10.0, -1.0, 0.0})[2] == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(rhs_inner_h({1.0, 0.0, 0.0}, 1e-3)[2] == doctest::Approx(1.0 - 1e-3));
}

TEST_CASE("inner equation scaling symmetry") {
    // g(s) = K^{-3} h(K^4 s) solves the same equation.
    const IntegratorConfig cfg{1e-13, 1e-15};
    auto f = [](double, const Vec3& y, Vec3& dy) { dy = rhs_inner_h(y); };
    auto h = integrate<3>(f, Vec3{1.0, -1.0, 0.5}, 0.0, 1.0, {}, cfg);
    for (double K : {0.5, 2.0, 3.0}) {
        const double k3 = K * K * K, k4 = k3 * K;
        const Vec3 g0{1.0 / k3, -1.0 * K, 0.5 * k4 * K};
        auto g = integrate<3>(f, g0, 0.0, 1.0 / k4, {}, cfg);
        CHECK(g.back()[0] == doctest::Approx(h.back()[0] / k3).epsilon(1e-9));
        CHECK(g.back()[1] == doctest::Approx(h.back()[1] * K).epsilon(1e-9));
    }
}
