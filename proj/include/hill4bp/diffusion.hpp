#pragma once

#include <string>
#include <vector>

#include "hill4bp/scattering.hpp"

namespace hill4bp {

struct DiffusionReport {
    enum class Mechanism { SingleMapBirkhoff, TwoMap };
    Mechanism mechanism = Mechanism::SingleMapBirkhoff;
    std::string channel_names;
    double x_lo = 0.0, x_hi = 0.0;
    bool verdict = false;
    bool negative_direction = false;  // integrals verified in |.|, sign was negative

    // single-map data
    std::vector<double> x_values;
    std::vector<double> integrals;       // per x*
    double bound = 0.0;                  // per-integral threshold
    double c1 = 0.0;                     // (range length) * (min |integral|)
    double c1_threshold = 0.0;
    double min_integral = 0.0;

    // two-map data
    struct Window {
        int map_index;  // 0 or 1
        double theta_lo, theta_hi;
        double min_value;
        double margin;
    };
    std::vector<Window> windows;
    double c_threshold = 0.0;
};

/// Integral over one theta-period of -dS/dtheta composed with sigma_0, by
/// composite Simpson over the chart grid restricted to [t0, t0+1], with a
/// half-resolution Richardson check.
double birkhoff_integral(const ScatteringChart& chart, double x_star, double t0 = 0.0,
                         double richardson_tol = 1e-3);

/// Single-map (Birkhoff) hypothesis check: |integral| > bound at each chart
/// x*, C1 = range * min |integral| reported against c1_threshold.
DiffusionReport verify_single_map(const ScatteringChart& chart, double bound,
                                  double c1_threshold);

/// Two-map hypothesis check: on each stated theta window, the designated
/// map's -dS o sigma_0 exceeds c at every grid x* and window grid point.
struct TwoMapWindows {
    double split = 0.0;      // boundary between map-1 and map-2 windows
    double lo = 0.0;         // window start (map 1 covers [lo, split])
    double hi = 0.0;         // window end   (map 2 covers [split, hi])
};
DiffusionReport verify_two_map(const ScatteringChart& chart1, const ScatteringChart& chart2,
                               const TwoMapWindows& windows, double c_threshold,
                               int min_points_per_window = 40);

enum class PseudoOrbitPolicy { Single, GreedyTwoMap };

struct PseudoOrbitStep {
    int map_index;  // applied map (0-based; -1 for none)
    double x_star;
    double theta;
    double action;
    double action_increment;
};

struct PseudoOrbit {
    std::vector<PseudoOrbitStep> steps;  // steps[0] is the initial point
    double eps = 0.0;
    bool exited_range = false;
    double net_action_change() const {
        return steps.empty() ? 0.0 : steps.back().action - steps.front().action;
    }
    double net_xstar_change() const {
        return steps.empty() ? 0.0 : steps.back().x_star - steps.front().x_star;
    }
};

/// Iterates the first-order scattering maps. The greedy two-map policy picks
/// at each step the map with the larger action gain -dS o sigma_0. Stops on
/// range exit or after n_steps.
PseudoOrbit pseudo_orbit(const std::vector<const ScatteringChart*>& charts,
                         PseudoOrbitPolicy policy, double x_start, double theta_start,
                         double eps, int n_steps);

} // namespace hill4bp
