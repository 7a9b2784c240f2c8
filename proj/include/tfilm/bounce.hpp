#pragma once

// Frozen (u, v) phase plane near touchdown, its separatrices, region labels
// and the inner matching solution of h''' = 1/h^3.

#include "tfilm/integrate.hpp"
#include "tfilm/systems.hpp"

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tfilm {

struct PhasePoint {
    double u = 0.0;
    double v = 0.0;
};

enum class Region { R1, R2, R3, R4, R5, OnIsocline };
const char* to_string(Region r);

enum class SeparatrixKind { VBar, VHat };
const char* to_string(SeparatrixKind k);

struct SeparatrixTable {
    SeparatrixKind kind = SeparatrixKind::VBar;
    std::vector<PhasePoint> samples;  // uniform in u, strictly increasing
    std::pair<double, double> u_range;
    // vhat only: backward-in-z approach to p_e.
    double pe_rate = 0.0;       // fitted d ln|x - p_e| / dz
    double pe_distance = 0.0;   // distance at the end of the run
    std::vector<std::pair<double, double>> pe_decay;  // (z, |x - p_e|)
};

struct SeparatrixConfig {
    double seed_u = 1e3;            // |u| where the asymptotic seed is placed
    double seed_rel_correction = 1e-6;  // max admissible relative size of the first neglected term
    IntegratorConfig integ{1e-12, 1e-14};
};

struct EigPe {
    PhasePoint pe;
    std::complex<double> lambda_plus;
    std::complex<double> lambda_minus;
    double real_part = 0.0;
    double trace = 0.0;
    double closed_form_gap = 0.0;
};

struct MatchingConstants {
    double amplitude_A = 0.0;
    double incoming_slope_K = 0.0;
    double gamma_out = 0.0;  // A / K^5, the K = 1 value
    double fit_residual = 0.0;
    std::pair<double, double> fit_window;
};

struct MatchingResult {
    Trajectory<3> trajectory;  // (h, h', h'') in s
    MatchingConstants constants;
};

class SeedOutOfAsymptoticRange : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class FitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

PhasePoint pe_point();
Region classify_region(const PhasePoint& p);
// Explicit R4 inequalities (strict).
bool in_r4(const PhasePoint& p);

SeparatrixTable compute_separatrix(SeparatrixKind kind, std::pair<double, double> u_range, int n,
                                   const SeparatrixConfig& cfg = {});

// Evaluate a table by linear interpolation in u (throws RangeError outside).
double separatrix_at(const SeparatrixTable& t, double u);

EigPe eig_pe();

// Frozen flow from (u, v) for z in [0, z_end] (negative for backward).
Trajectory<2> frozen_orbit(const PhasePoint& p, double z_end, const std::vector<Event<2>>& events = {},
                           const IntegratorConfig& cfg = {1e-12, 1e-14});

// Far-field incoming data h = -K s - ln|s| / (2 K^3), s < 0.
Vec3 matching_seed(double K, double s);

// s_range.first must lie deep in the incoming regime: K^4 |s| >= 100.
MatchingResult matching_solution(double K, std::pair<double, double> s_range,
                                 const IntegratorConfig& cfg = {1e-12, 1e-14});
// Range used when none is given: s in [-1e3, 1e3] / K^4.
std::pair<double, double> default_matching_range(double K);

}  // namespace tfilm
