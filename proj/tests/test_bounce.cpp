#include "doctest.h"
#include "gen.hpp"

#include "tfilm/bounce.hpp"

#include <cmath>

using namespace tfilm;

namespace {
// Region from the raw direction field.
Region region_oracle(double u, double v) {
    const double du = v + u * u / 3.0, dv = 1.0 + 5.0 / 3.0 * u * v;
    if (du > 0 && dv > 0) return Region::R4;
    if (du > 0 && dv < 0) return u < 0 ? Region::R5 : Region::R3;
    if (du < 0 && dv > 0) return Region::R1;
    return Region::R2;
}
}  // namespace

TEST_CASE("region labels") {
    CHECK(classify_region(pe_point()) == Region::OnIsocline);
    CHECK(classify_region({0, 1}) == Region::R4);
    CHECK(classify_region({-1, 0}) == Region::R4);
    CHECK(classify_region({-2, 1}) == Region::R5);
    CHECK(classify_region({0, -1}) == Region::R1);
    testgen::Gen g(41);
    for (int k = 0; k < 2000; ++k) {
        const PhasePoint p{g.uniform(-5, 5), g.uniform(-5, 5)};
        const Region r = classify_region(p);
        if (r == Region::OnIsocline) continue;
        CHECK(r == region_oracle(p.u, p.v));
        CHECK(in_r4(p) == (r == Region::R4));
    }
}

TEST_CASE("critical point and its eigenvalues") {
    const EigPe e = eig_pe();
    const double ue = std::cbrt(9.0 / 5.0);
    CHECK(e.pe.u == doctest::Approx(ue).epsilon(1e-14));
    CHECK(e.pe.v == doctest::Approx(-ue * ue / 3.0).epsilon(1e-14));
    const double s = std::cbrt(1.0 / 15.0);
    CHECK(std::abs(e.lambda_plus.real() - 3.5 * s) < 1e-10);
    CHECK(std::abs(std::abs(e.lambda_plus.imag()) - 0.5 * std::sqrt(11.0) * s) < 1e-10);
    CHECK(std::abs(e.lambda_minus - std::conj(e.lambda_plus)) < 1e-12);
    CHECK(e.real_part == doctest::Approx(1.419240).epsilon(1e-4));
    CHECK(std::abs(e.lambda_plus.imag()) == doctest::Approx(0.672425).epsilon(1e-4));
    CHECK(std::abs(e.trace - 2 * e.real_part) < 1e-12);
    CHECK(e.closed_form_gap < 1e-10);
}

TEST_CASE("separatrix vbar") {
    const SeparatrixTable t = compute_separatrix(SeparatrixKind::VBar, {-30.0, 100.0}, 2601);
    for (const auto& p : t.samples) CHECK(in_r4(p));
    // Independent high-precision values.
    const std::pair<double, double> ref[] = {{-20, 0.02499947920731644}, {-5, 0.09986732853939054},
                                             {0, 1.0507572528625821},    {5, 17.355894033513927},
                                             {20, 213.5350550349379},    {100, 5048.072942545371}};
    for (const auto& [u, v] : ref) {
        const double got = separatrix_at(compute_separatrix(SeparatrixKind::VBar, {u, u + 1}, 2), u);
        CHECK(got == doctest::Approx(v).epsilon(1e-8));
    }
    CHECK(std::abs(separatrix_at(t, -20) - 1.0 / 40) <= 0.05 / 40);
    CHECK(std::abs(separatrix_at(t, 20) - 200) <= 2 * std::pow(20.0, 0.8));

    // Correction exponent of vbar - u^2/2 on [10, 100].
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& p : t.samples) {
        if (p.u < 10) continue;
        const double x = std::log(p.u), y = std::log(p.v - 0.5 * p.u * p.u);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope <= 0.85);
    CHECK(slope > 0.5);
    CHECK_THROWS_AS(separatrix_at(t, 200), RangeError);
}

TEST_CASE("vbar attracts nearby orbits forward in z") {
    const SeparatrixTable t = compute_separatrix(SeparatrixKind::VBar, {-6.0, 6.0}, 24001);
    const double v0 = separatrix_at(t, -5) + 1e-3;
    Event<2> stop;
    stop.guard = [](double, const Vec<2>& y) { return y[0] - 5.0; };
    stop.direction = Direction::Rising;
    auto tr = frozen_orbit({-5, v0}, 1e3, {stop});
    double best = 1e9;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        if (tr.y[i][0] < 5) best = std::min(best, std::abs(tr.y[i][1] - separatrix_at(t, tr.y[i][0])));
    CHECK(best < 1e-4);
}

TEST_CASE("random starts enter R4") {
    testgen::Gen g(42);
    for (int k = 0; k < 30; ++k) {
        const PhasePoint p{g.uniform(-3, 3), g.uniform(-3, 3)};
        Event<2> big;
        big.guard = [](double, const Vec<2>& y) { return 1e4 - std::abs(y[0]) - std::abs(y[1]); };
        auto tr = frozen_orbit(p, 50.0, {big});
        bool hit = false;
        for (const auto& y : tr.y) hit = hit || in_r4({y[0], y[1]});
        CHECK(hit);
    }
}

TEST_CASE("separatrix vhat tends to p_e") {
    const SeparatrixTable t = compute_separatrix(SeparatrixKind::VHat, {-1.0, 100.0}, 1001);
    CHECK(t.pe_rate == doctest::Approx(eig_pe().real_part).epsilon(0.02));
    CHECK(t.pe_distance < 1e-8);
    for (std::size_t i = 1; i < t.samples.size(); ++i) CHECK(t.samples[i].u > t.samples[i - 1].u);
}

TEST_CASE("separatrix seeding guard") {
    SeparatrixConfig cfg;
    cfg.seed_u = 5;
    CHECK_THROWS_AS(compute_separatrix(SeparatrixKind::VBar, {-1, 1}, 11, cfg), SeedOutOfAsymptoticRange);
}

TEST_CASE("matching amplitude") {
    const MatchingResult m1 = matching_solution(1.0, default_matching_range(1.0));
    CHECK(m1.constants.amplitude_A > 0);
    CHECK(m1.constants.amplitude_A == doctest::Approx(0.6049241160868487).epsilon(1e-4));
    CHECK(m1.constants.gamma_out == doctest::Approx(m1.constants.amplitude_A));
    for (double K : {0.5, 2.0, 4.0}) {
        const MatchingResult m = matching_solution(K, default_matching_range(K));
        CHECK(m.constants.amplitude_A / std::pow(K, 5) == doctest::Approx(m1.constants.amplitude_A).epsilon(1e-2));
        CHECK(m.constants.incoming_slope_K == K);
    }
}

TEST_CASE("matching seed is the unique non-growing incoming solution") {
    // Adding h'' = 1e-3 at the seed destroys the incoming slope within |s| ~ 1e3.
    const double s0 = -1e3;
    Vec3 clean = matching_seed(1.0, s0), pert = clean;
    pert[2] += 1e-3;
    auto f = [](double, const Vec3& y, Vec3& dy) { dy = rhs_inner_h(y); };
    auto a = integrate<3>(f, clean, s0, 2 * s0, {}, {1e-12, 1e-14});
    auto b = integrate<3>(f, pert, s0, 2 * s0, {}, {1e-12, 1e-14});
    CHECK(std::abs(a.back()[1] + 1.0) < 1e-3);
    CHECK(std::abs(b.back()[1] + 1.0) > 0.5);
}

TEST_CASE("matching guards") {
    CHECK_THROWS_AS(matching_solution(1.0, {-10.0, 1e3}), SeedOutOfAsymptoticRange);
    CHECK_THROWS_AS(matching_solution(1.0, {-1e3, 1.0}), FitFailure);
}
