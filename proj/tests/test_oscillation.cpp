#include "doctest.h"

#include "tfilm/oscillation.hpp"
#include "tfilm/polyfamily.hpp"

#include <cmath>
#include <numbers>

using namespace tfilm;

namespace {
constexpr double pi = std::numbers::pi;

// Phi = 2 + sin(tau), theta frozen at th.
Trajectory<4> sine_traj(double t0, double t1, double th) {
    auto f = [](double, const Vec4& y, Vec4& dy) { dy = {y[1], y[2], -y[1], 0.0}; };
    return integrate<4>(f, Vec4{2.0, 1.0, 0.0, th}, t0, t1, {}, {1e-12, 1e-14});
}

ExtremaSequence from_maxima(const std::vector<double>& phis) {
    ExtremaSequence s;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        s.maxima.push_back({-10.0 * i, phis[i]});
        if (i + 1 < phis.size()) s.minima.push_back({-10.0 * i - 5, 1.0});
    }
    return s;
}
}  // namespace

TEST_CASE("monotone trajectory has no extrema") {
    auto f = [](double, const Vec4&, Vec4& dy) { dy = {1.0, 0.0, 0.0, 0.0}; };
    auto tr = integrate<4>(f, Vec4{1.0, 1.0, 0.0, 0.0}, 0.0, -20.0, {}, {});
    const ExtremaSequence s = extract_extrema(tr);
    CHECK(s.maxima.empty());
    CHECK(s.minima.empty());
}

TEST_CASE("extrema of 2 + sin(tau)") {
    const auto tr = sine_traj(0.0, -30.0, 0.0);
    const ExtremaSequence s = extract_extrema(tr);
    REQUIRE(s.maxima.size() == 5);
    for (std::size_t k = 0; k < s.maxima.size(); ++k) {
        CHECK(std::abs(s.maxima[k].tau - (pi / 2 - 2 * pi * (k + 1))) <= 1e-9);
        CHECK(s.maxima[k].phi == doctest::Approx(3.0).epsilon(1e-10));
    }
    REQUIRE(s.minima.size() == 5);
    for (std::size_t k = 0; k < s.minima.size(); ++k)
        CHECK(std::abs(s.minima[k].tau - (-pi / 2 - 2 * pi * k)) <= 1e-9);
    // Interleaving: every minimum between consecutive maxima lies strictly between them.
    for (std::size_t k = 1; k < s.maxima.size(); ++k) {
        int n = 0;
        for (const auto& m : s.minima) n += m.tau < s.maxima[k - 1].tau && m.tau > s.maxima[k].tau;
        CHECK(n == 1);
    }
    // Forward traversal finds the same extrema.
    const ExtremaSequence f = extract_extrema(sine_traj(0.0, 20.0, 0.0));
    REQUIRE(f.maxima.size() == 3);
    CHECK(std::abs(f.maxima.back().tau - pi / 2) <= 1e-9);
    // Large prominence threshold removes everything.
    CHECK(extract_extrema(tr, 0.9).maxima.empty());
}

TEST_CASE("rescaling identities") {
    const auto tr = sine_traj(0.0, -30.0, -1.4);
    const ExtremaSequence s = extract_extrema(tr);
    REQUIRE(!s.maxima.empty());
    for (int i = 0; i < int(s.maxima.size()); ++i) {
        const RescaledMax r = rescale_max(tr, s, i);
        CHECK(r.xi_star == doctest::Approx(std::tan(-1.4)).epsilon(1e-14));
        CHECK(r.delta_n * r.phi_star * r.phi_star * r.phi_star == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.m_n * std::pow(std::abs(r.xi_star), 17.0 / 3) == doctest::Approx(r.phi_star).epsilon(1e-12));
        CHECK(r.beta_n < 0);
    }
    CHECK_THROWS_AS(rescale_max(tr, s, int(s.maxima.size())), std::out_of_range);
}

TEST_CASE("comparison with the rescaled polynomial on an exact outer solution") {
    // With the 1/H^3 term removed, H''' = -xi^2 is solved exactly by
    // H = |xi*|^5 M Pbar(zeta), zeta = (1 - xi/xi*) / M^{1/3}.
    const ModelParams p{0.0};
    const double xs = -50.0, m = 1.0, beta = 0.9 * double_zero(m).beta_star;
    const PolyValue pb = eval_Pbar(0.0, {m, beta});
    const double amp = std::pow(std::abs(xs), 5) * m, dz = -1.0 / (xs * std::cbrt(m));
    const CompactState c0 = compact_of_phys({xs, amp * pb.p, amp * pb.d1 * dz, amp * pb.d2 * dz * dz});
    auto f = [&p](double, const Vec4& y, Vec4& dy) {
        rhs_compact(y, p, dy);
        dy[2] -= 1.0 / (y[0] * y[0] * y[0]);
    };
    const double t0 = tau_of_xi(xs);
    auto tr = integrate<4>(f, to_vec(c0), t0, tau_of_xi(60.0), {}, {1e-12, 1e-14});
    RescaledMax r;
    r.xi_star = xs;
    r.m_n = m;
    r.beta_n = beta;
    const PolyComparison c = compare_to_polynomial(tr, r);
    CHECK(c.zeta_end == doctest::Approx(0.9 * c.zeta0));
    CHECK(c.max_rel_dev < 1e-6);
    CHECK(c.max_d1_dev < 1e-6);
    CHECK(c.max_d2_dev < 1e-6);
    CHECK(c.beta_rel_dev == doctest::Approx(0.1).epsilon(1e-9));

    auto short_tr = integrate<4>(f, to_vec(c0), t0, t0 + 10.0, {}, {1e-12, 1e-14});
    CHECK_THROWS_AS(compare_to_polynomial(short_tr, r), WindowEmpty);
}

TEST_CASE("iteration exponent on an exact tower") {
    // Phi_{n-1} = 3 Phi_n^10.
    const double p3 = 1.6, p2 = 3 * std::pow(p3, 10), p1 = 3 * std::pow(p2, 10), p0 = 3 * std::pow(p1, 10);
    const ExponentFit f = iteration_exponent(from_maxima({p0, p1, p2, p3}));
    CHECK(f.pairs_used == 2);
    CHECK(std::abs(f.exponent_max - 10.0) <= 1e-9);
    CHECK(f.log_c == doctest::Approx(std::log(3.0)).epsilon(1e-8));
    CHECK_THROWS_AS(iteration_exponent(from_maxima({p1, p2})), InsufficientData);
    CHECK_THROWS_AS(iteration_exponent(from_maxima({p2, p3, 1.0})), InsufficientData);
}

TEST_CASE("theta lookup") {
    auto f = [](double, const Vec4&, Vec4& dy) { dy = {0.0, 0.0, 0.0, 0.1}; };
    auto tr = integrate<4>(f, Vec4{1.0, 0.0, 0.0, -1.0}, 0.0, 10.0, {}, {});
    CHECK(tau_at_theta(tr, -0.5) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK_THROWS_AS(tau_at_theta(tr, 0.5), WindowEmpty);
}
