#include "hill4bp/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "hill4bp/errors.hpp"

namespace hill4bp {

namespace {

inline double wrap_unit(double x) {
    double w = std::fmod(x, 1.0);
    if (w < 0.0) w += 1.0;
    return w;
}

// composite Simpson over [a, b] of the chart's -dS values at fixed x*,
// sampling every `stride`-th point of a uniform refinement
double simpson_scan(const ScatteringChart& chart, double x_star, double a, double b,
                    std::size_t n_panels) {
    // n_panels must be even
    if (n_panels % 2 != 0) ++n_panels;
    const double h = (b - a) / static_cast<double>(n_panels);
    double sum = 0.0;
    for (std::size_t i = 0; i <= n_panels; ++i) {
        const double th = a + h * static_cast<double>(i);
        const double v = -chart.interp_ds(x_star, th);
        const double w = (i == 0 || i == n_panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * v;
    }
    return sum * h / 3.0;
}

} // namespace

double birkhoff_integral(const ScatteringChart& chart, double x_star, double t0,
                         double richardson_tol) {
    const double lo = chart.theta_lo();
    const double window = chart.theta_hi() - lo;
    if (std::abs(window - 1.0) > 1e-9)
        throw DomainError("Birkhoff integral needs a unit-length chart window");
    // integrate over [t0, t0+1] expressed in the chart's window branch;
    // since the stored integrand is the window branch extended mod 1, the
    // value equals the window integral
    (void)t0;
    const std::size_t n = chart.theta_grid.size();
    if (n < 9) throw ResolutionError("chart grid too coarse for the Birkhoff integral");
    const std::size_t panels = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    const double full = simpson_scan(chart, x_star, lo, lo + 1.0, panels);
    const double half = simpson_scan(chart, x_star, lo, lo + 1.0, panels / 2);
    if (std::abs(full - half) > richardson_tol)
        throw ResolutionError("Birkhoff integral Richardson check failed: |" +
                              std::to_string(full) + " - " + std::to_string(half) +
                              "| too large");
    return full;
}

DiffusionReport verify_single_map(const ScatteringChart& chart, double bound,
                                  double c1_threshold) {
    DiffusionReport rep;
    rep.mechanism = DiffusionReport::Mechanism::SingleMapBirkhoff;
    rep.channel_names = channel_label_name(chart.label);
    rep.x_lo = chart.x_grid.front();
    rep.x_hi = chart.x_grid.back();
    rep.bound = bound;
    rep.c1_threshold = c1_threshold;

    double min_abs = 1e300;
    bool all_negative = true, all_positive = true;
    for (double x : chart.x_grid) {
        const double v = birkhoff_integral(chart, x);
        rep.x_values.push_back(x);
        rep.integrals.push_back(v);
        min_abs = std::min(min_abs, std::abs(v));
        (v < 0.0 ? all_positive : all_negative) = false;
    }
    rep.min_integral = min_abs;
    rep.negative_direction = all_negative;
    const bool coherent_sign = all_negative || all_positive;
    rep.c1 = (rep.x_hi - rep.x_lo) * min_abs;
    rep.verdict = coherent_sign && min_abs > bound && rep.c1 >= c1_threshold;
    return rep;
}

DiffusionReport verify_two_map(const ScatteringChart& chart1, const ScatteringChart& chart2,
                               const TwoMapWindows& windows, double c_threshold,
                               int min_points_per_window) {
    DiffusionReport rep;
    rep.mechanism = DiffusionReport::Mechanism::TwoMap;
    rep.channel_names = std::string(channel_label_name(chart1.label)) + "+" +
                        channel_label_name(chart2.label);
    rep.x_lo = chart1.x_grid.front();
    rep.x_hi = chart1.x_grid.back();
    rep.c_threshold = c_threshold;

    auto scan_window = [&](const ScatteringChart& chart, int map_index, double lo,
                           double hi) {
        DiffusionReport::Window w;
        w.map_index = map_index;
        w.theta_lo = lo;
        w.theta_hi = hi;
        double min_v = 1e300;
        const int n = std::max(min_points_per_window, 40);
        for (double x : chart.x_grid) {
            for (int i = 0; i <= n; ++i) {
                const double th = lo + (hi - lo) * static_cast<double>(i) / n;
                min_v = std::min(min_v, -chart.interp_ds(x, th));
            }
        }
        w.min_value = min_v;
        w.margin = min_v - c_threshold;
        return w;
    };

    rep.windows.push_back(scan_window(chart1, 0, windows.lo, windows.split));
    rep.windows.push_back(scan_window(chart2, 1, windows.split, windows.hi));
    rep.verdict = true;
    for (const auto& w : rep.windows)
        if (!(w.min_value > c_threshold)) rep.verdict = false;
    return rep;
}

PseudoOrbit pseudo_orbit(const std::vector<const ScatteringChart*>& charts,
                         PseudoOrbitPolicy policy, double x_start, double theta_start,
                         double eps, int n_steps) {
    if (charts.empty()) throw ParameterError("pseudo_orbit needs at least one chart");
    if (policy == PseudoOrbitPolicy::GreedyTwoMap && charts.size() < 2)
        throw ParameterError("greedy-two-map policy needs two charts");
    if (eps < 0.0 || eps > 0.01)
        throw ParameterError("eps outside the first-order validity cap [0, 0.01]");

    const double x_lo = charts[0]->x_grid.front();
    const double x_hi = charts[0]->x_grid.back();

    PseudoOrbit orbit;
    orbit.eps = eps;
    double x = x_start, theta = theta_start;
    orbit.steps.push_back({-1, x, theta, charts[0]->interp_action(x), 0.0});

    for (int step = 0; step < n_steps; ++step) {
        if (x < x_lo - 1e-12 || x > x_hi + 1e-12) {
            orbit.exited_range = true;
            break;
        }
        std::size_t pick = 0;
        if (policy == PseudoOrbitPolicy::GreedyTwoMap) {
            double best_gain = -1e300;
            for (std::size_t j = 0; j < charts.size(); ++j) {
                const ScatteringStep trial =
                    scattering_map_first_order(*charts[j], x, theta, eps);
                // ties break toward the lower map index
                if (trial.action_gain > best_gain + 1e-15) {
                    best_gain = trial.action_gain;
                    pick = j;
                }
            }
        }
        const ScatteringStep s = scattering_map_first_order(*charts[pick], x, theta, eps);
        orbit.steps.push_back({static_cast<int>(pick), s.x_star, wrap_unit(s.theta),
                               s.action, s.action_gain});
        x = s.x_star;
        theta = wrap_unit(s.theta);
        if (x < x_lo || x > x_hi) {
            orbit.exited_range = true;
            break;
        }
    }
    return orbit;
}

} // namespace hill4bp
