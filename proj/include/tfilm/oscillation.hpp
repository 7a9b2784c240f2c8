#pragma once

// Extrema of Phi along compact trajectories, the rescaled quantities at a
// maximum, comparison with the rescaled polynomial and the iteration exponent.

#include "tfilm/integrate.hpp"
#include "tfilm/systems.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace tfilm {

struct Extremum {
    double tau = 0.0;
    double phi = 0.0;
};

// Both lists ordered by decreasing tau (index n grows towards tau -> -inf).
struct ExtremaSequence {
    std::vector<Extremum> maxima;
    std::vector<Extremum> minima;
};

struct RescaledMax {
    double tau_star = 0.0;
    double phi_star = 0.0;
    double xi_star = 0.0;
    double m_n = 0.0;
    double beta_n = 0.0;
    double delta_n = 0.0;
};

struct PolyComparison {
    double zeta0 = 0.0;           // root of Pbar(.; M_n, beta_n)
    double zeta_end = 0.0;        // (1 - margin) zeta0
    double max_rel_dev = 0.0;     // sup |Hn - Pbar| / |Pbar|
    double max_d1_dev = 0.0;      // sup |Hn' - Pbar'| / sup |Pbar'|
    double max_d2_dev = 0.0;      // sup |Hn'' - Pbar''| / sup |Pbar''|
    double beta_star = 0.0;       // beta*(M_n)
    double beta_rel_dev = 0.0;    // |beta_n - beta*| / |beta*|
    int samples = 0;
};

struct ExponentFit {
    double exponent_max = 0.0;
    std::optional<double> exponent_min;
    int pairs_used = 0;
    double log_c = 0.0;  // intercept of the maxima fit
};

class WindowEmpty : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Extrema of Phi from sign changes of W, refined by bisection on the dense
// output. An adjacent max/min pair whose Phi difference is below
// min_prominence times the larger Phi of the pair is discarded.
ExtremaSequence extract_extrema(const Trajectory<4>& traj, double min_prominence = 1e-3);

// Locate tau where theta(tau) = target along a trajectory (theta is monotone).
double tau_at_theta(const Trajectory<4>& traj, double theta);

RescaledMax rescale_max(const Trajectory<4>& traj, const ExtremaSequence& seq, int max_index);
RescaledMax rescale_at(const Trajectory<4>& traj, double tau_star);

PolyComparison compare_to_polynomial(const Trajectory<4>& traj, const RescaledMax& r, double margin = 0.1,
                                     int samples = 200);

ExponentFit iteration_exponent(const ExtremaSequence& seq, double deep = 1e2);

}  // namespace tfilm
