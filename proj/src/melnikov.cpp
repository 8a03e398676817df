#include "hill4bp/scattering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "hill4bp/errors.hpp"
#include "hill4bp/fields.hpp"
#include "hill4bp/parallel.hpp"

namespace hill4bp {

namespace {

inline double wrap_unit(double x) {
    double w = std::fmod(x, 1.0);
    if (w < 0.0) w += 1.0;
    return w;
}

// Neville polynomial interpolation over a small node set.
double neville(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    std::vector<double> p = ys;
    const std::size_t n = xs.size();
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i)
            p[i] = ((x - xs[i + level]) * p[i] + (xs[i] - x) * p[i + 1]) /
                   (xs[i] - xs[i + level]);
    return p[0];
}

double neville_slope(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const double h = 1e-5;
    return (neville(xs, ys, x + h) - neville(xs, ys, x - h)) / (2.0 * h);
}

// Adaptive Simpson with absolute tolerance.
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 24);
}

// Oscillatory improper integral: blocks of one kernel half-period.
template <class F>
double oscillatory_integral(const F& f, double a, double b, double tol) {
    if (a >= b) return 0.0;
    const double block = M_PI;
    const long k0 = static_cast<long>(std::floor(a / block));
    const long k1 = static_cast<long>(std::ceil(b / block));
    const double per_block_tol = tol / static_cast<double>(std::max<long>(k1 - k0, 1));
    double sum = 0.0;
    for (long k = k0; k < k1; ++k) {
        const double lo = std::max(a, k * block);
        const double hi = std::min(b, (k + 1) * block);
        if (hi > lo) sum += adaptive_simpson(f, lo, hi, per_block_tol);
    }
    return sum;
}

} // namespace

ConnectionSampler::ConnectionSampler(const ConnectionPoint& conn, const ModelParams& p,
                                     const IntegratorConfig& cfg, const MelnikovConfig& mcfg)
    : conn_(conn), params_(p) {
    mcfg.validate();
    const ConnectionCandidate& cand = conn.candidate;
    sym_ = cand.type == ConnectionType::Homoclinic ? Symmetry::S : Symmetry::Sprime;
    flight_time_ = cand.flight_time;
    theta_seed_ = cand.theta_seed;
    displacement_ = cand.displacement;
    branch_sign_ = cand.branch_sign;

    const PhaseState seed = manifold_seed(source(), ManifoldKind::Unstable, branch_sign_,
                                          displacement_, theta_seed_);
    Ch4bpField f{p, cfg.r_min};
    core_ = propagate<4>(f, seed.to_array(), 0.0, flight_time_, cfg);

    // truncation horizon: where the bracketed difference stays below tail_cut
    const double T = period();
    const double cap = mcfg.max_horizon * T;
    double tau = std::min(flight_time_, cap);
    int quiet = 0;
    const double probe = T / 16.0;
    tau_cut_ = cap;
    while (tau < cap) {
        if (std::abs(bracketed_difference(-tau)) < mcfg.tail_cut) {
            if (++quiet >= 16) { tau_cut_ = tau; break; }
        } else {
            quiet = 0;
        }
        tau += probe;
    }
    if (tau_cut_ >= cap - probe && quiet < 16)
        throw DecayError("Melnikov integrand does not decay below tail_cut "
                         "within the horizon (foot-point mismatch?)");
}

PhaseState ConnectionSampler::eval_backward(double tau) const {
    // tau <= 0, measured from the connection point
    const double s = tau + flight_time_;  // time from the seed
    if (s >= 0.0) return core_.state_at(s);
    // linear Floquet asymptote behind the seed
    const PeriodicOrbit& src = source();
    const double T = src.period;
    const double phase = theta_seed_ + s / T;
    const PhaseState base = k0_param(src, phase);
    const Vec4 v0 = transported_unstable(src, theta_seed_ * T);
    double n0 = 0.0;
    for (double c : v0) n0 += c * c;
    n0 = std::sqrt(n0);
    const Vec4 v = transported_unstable(src, theta_seed_ * T + s);
    const double scale = branch_sign_ * displacement_ / n0;
    return {base.x + scale * v[0], base.y + scale * v[1], base.px + scale * v[2],
            base.py + scale * v[3]};
}

PhaseState ConnectionSampler::eval(double tau) const {
    if (tau <= 0.0) return eval_backward(tau);
    return apply_symmetry(eval_backward(-tau), sym_);
}

double ConnectionSampler::h1_at(double tau) const {
    const PhaseState z = eval(tau);
    return h1_perturbation(z.x, z.y, params_);
}

double ConnectionSampler::bracketed_difference(double tau) const {
    const double T = period();
    if (tau <= 0.0) {
        const double phase = conn_.theta_minus + tau / T;
        const PhaseState k = k0_param(source(), phase);
        return h1_at(tau) - h1_perturbation(k.x, k.y, params_);
    }
    const double phase = conn_.theta_plus + tau / T;
    const PhaseState k = k0_param(target(), phase);
    return h1_at(tau) - h1_perturbation(k.x, k.y, params_);
}

namespace {

struct LegSpec {
    double z_offset;      // z is sampled at tau = t + z_offset
    double back_phase0;   // source-chart phase at t = 0 (backward comparison)
    double fwd_phase0;    // target-chart phase at t = 0 (forward comparison)
};

// Two-sided improper integral of kern(t) * [H1(z) - H1(orbit comparison)].
double melnikov_legs(const ConnectionSampler& zs, const LegSpec& leg, bool cosine,
                     const ModelParams& p, const MelnikovConfig& mcfg) {
    const double T = zs.period();
    const double t_min = -zs.tau_cut() - leg.z_offset;
    const double t_max = zs.tau_cut() - leg.z_offset;
    const auto h1_of = [&p](const PhaseState& z) {
        return h1_perturbation(z.x, z.y, p);
    };
    const PeriodicOrbit& src = zs.source();
    const PeriodicOrbit& tgt = zs.target();

    const auto back = [&](double t) {
        const double kern = cosine ? std::cos(t) : std::sin(t);
        const PhaseState k = k0_param(src, leg.back_phase0 + t / T);
        return kern * (zs.h1_at(t + leg.z_offset) - h1_of(k));
    };
    const auto fwd = [&](double t) {
        const double kern = cosine ? std::cos(t) : std::sin(t);
        const PhaseState k = k0_param(tgt, leg.fwd_phase0 + t / T);
        return kern * (zs.h1_at(t + leg.z_offset) - h1_of(k));
    };
    const double tol = 0.5 * mcfg.quad_tol;
    return oscillatory_integral(back, t_min, 0.0, tol) +
           oscillatory_integral(fwd, 0.0, t_max, tol);
}

} // namespace

double melnikov_S(const ConnectionSampler& zs, double theta, const ModelParams& p,
                  const MelnikovConfig& mcfg) {
    const ConnectionPoint& c = zs.connection();
    const double T = zs.period();
    LegSpec leg;
    leg.z_offset = (theta - c.theta_plus) * T;
    leg.back_phase0 = theta - c.delta_unreduced;
    leg.fwd_phase0 = theta;
    return melnikov_legs(zs, leg, /*cosine=*/false, p, mcfg);
}

double melnikov_dS_dtheta_composed(const ConnectionSampler& zs, double theta,
                                   const ModelParams& p, const MelnikovConfig& mcfg) {
    const ConnectionPoint& c = zs.connection();
    const double T = zs.period();
    LegSpec leg;
    leg.z_offset = (theta - c.theta_minus) * T;
    leg.back_phase0 = theta;
    leg.fwd_phase0 = theta + c.delta_unreduced;
    return -T * melnikov_legs(zs, leg, /*cosine=*/true, p, mcfg);
}

namespace {

// Catmull-Rom interpolation on a uniform grid.
double interp_uniform(const std::vector<double>& grid, const std::vector<double>& vals,
                      double x) {
    const std::size_t n = grid.size();
    if (n == 1) return vals[0];
    const double h = grid[1] - grid[0];
    double u = (x - grid[0]) / h;
    const long i = std::clamp<long>(static_cast<long>(std::floor(u)), 0,
                                    static_cast<long>(n) - 2);
    const double s = u - static_cast<double>(i);
    const double y0 = vals[static_cast<std::size_t>(std::max<long>(i - 1, 0))];
    const double y1 = vals[static_cast<std::size_t>(i)];
    const double y2 = vals[static_cast<std::size_t>(i + 1)];
    const double y3 = vals[static_cast<std::size_t>(std::min<long>(i + 2, n - 1))];
    const double a0 = y1;
    const double a1 = 0.5 * (y2 - y0);
    const double a2 = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
    const double a3 = 0.5 * (y3 - y0) + 1.5 * (y1 - y2);
    return a0 + s * (a1 + s * (a2 + s * a3));
}

} // namespace

double ScatteringChart::interp_ds(double x_star, double theta) const {
    std::vector<double> per_x(x_grid.size());
    for (std::size_t ix = 0; ix < x_grid.size(); ++ix)
        per_x[ix] = interp_uniform(theta_grid, ds_composed[ix], theta);
    return neville(x_grid, per_x, x_star);
}

double ScatteringChart::interp_s(double x_star, double theta) const {
    std::vector<double> per_x(x_grid.size());
    for (std::size_t ix = 0; ix < x_grid.size(); ++ix)
        per_x[ix] = interp_uniform(theta_grid, s_values[ix], theta);
    return neville(x_grid, per_x, x_star);
}

double ScatteringChart::interp_delta(double x_star) const {
    return neville(x_grid, deltas, x_star);
}

double ScatteringChart::interp_action(double x_star) const {
    return neville(x_grid, actions, x_star);
}

double ScatteringChart::action_slope(double x_star) const {
    return neville_slope(x_grid, actions, x_star);
}

double ScatteringChart::x_star_for_action(double action) const {
    // monotone over the family range; Newton on the interpolant
    double x = 0.5 * (x_grid.front() + x_grid.back());
    for (int it = 0; it < 60; ++it) {
        const double f = interp_action(x) - action;
        const double df = action_slope(x);
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-14) break;
    }
    return x;
}

ScatteringChart build_chart(const Channel& channel, const std::vector<double>& theta_grid,
                            const ModelParams& p, const IntegratorConfig& cfg,
                            const MelnikovConfig& mcfg) {
    if (channel.nodes.empty()) throw ParameterError("empty channel");
    if (theta_grid.size() < 1) throw ParameterError("empty theta grid");
    ScatteringChart chart;
    chart.label = channel.label;
    chart.mcfg = mcfg;
    chart.theta_grid = theta_grid;
    for (const auto& n : channel.nodes) {
        chart.x_grid.push_back(n.x_star());
        chart.deltas.push_back(n.conn.delta_unreduced);
        chart.theta_minus.push_back(n.conn.theta_minus);
        chart.periods.push_back(n.source->period);
        chart.energies.push_back(n.source->energy);
        chart.actions.push_back(n.source->action);
    }

    const std::size_t nx = channel.nodes.size();
    const std::size_t nt = theta_grid.size();
    chart.s_values.assign(nx, std::vector<double>(nt, 0.0));
    chart.ds_composed.assign(nx, std::vector<double>(nt, 0.0));

    // samplers are built serially (they propagate), grid points in parallel
    std::vector<std::unique_ptr<ConnectionSampler>> samplers;
    samplers.reserve(nx);
    for (const auto& node : channel.nodes)
        samplers.push_back(std::make_unique<ConnectionSampler>(node.conn, p, cfg, mcfg));

    std::atomic<std::size_t> failures{0};
    parallel_for(nx * nt, [&](std::size_t k) {
        const std::size_t ix = k / nt;
        const std::size_t it = k % nt;
        try {
            chart.s_values[ix][it] = melnikov_S(*samplers[ix], theta_grid[it], p, mcfg);
            chart.ds_composed[ix][it] =
                melnikov_dS_dtheta_composed(*samplers[ix], theta_grid[it], p, mcfg);
        } catch (const std::exception&) {
            chart.s_values[ix][it] = std::numeric_limits<double>::quiet_NaN();
            chart.ds_composed[ix][it] = std::numeric_limits<double>::quiet_NaN();
            failures.fetch_add(1);
        }
    });
    chart.failed_points = failures.load();
    if (chart.failed_points * 100 > nx * nt)
        throw ResolutionError("more than 1% of chart points failed");
    return chart;
}

ScatteringStep scattering_map_first_order(const ScatteringChart& chart, double x_star,
                                          double theta, double eps) {
    if (eps < 0.0 || eps > 0.01)
        throw ParameterError("eps outside the first-order validity cap [0, 0.01]");
    const double lo = chart.theta_lo();
    const double window = chart.theta_hi() - lo;
    if (std::abs(window - 1.0) > 1e-9)
        throw DomainError("scattering-map evaluation needs a unit-length chart window");

    const double delta = chart.interp_delta(x_star);
    // ds_composed already carries the sigma_0 composition, so the map's
    // epsilon-term reads it at theta; the raw S chart is read at the
    // composed argument theta + Delta. Both wrapped into the window branch.
    auto into_window = [&](double th) {
        return lo + wrap_unit((th - lo) / window) * window;
    };
    const double theta_w = into_window(theta);
    const double shifted = into_window(theta + delta);

    ScatteringStep out;
    out.x_star = x_star;
    out.action = chart.interp_action(x_star);
    if (eps == 0.0) {
        out.theta = theta + delta;
        out.action_gain = 0.0;
        return out;
    }
    const double ds_dtheta = chart.interp_ds(x_star, theta_w);
    // dS/dI via central differences of S across x*, converted through
    // dI/dx* = T dh/dx*
    const double hx = 0.25 * (chart.x_grid.back() - chart.x_grid.front());
    const double xm = std::max(chart.x_grid.front(), x_star - hx);
    const double xp = std::min(chart.x_grid.back(), x_star + hx);
    const double ds_dxstar =
        (chart.interp_s(xp, shifted) - chart.interp_s(xm, shifted)) / (xp - xm);
    const double didx = chart.action_slope(x_star);
    const double ds_di = ds_dxstar / didx;

    out.action_gain = -eps * ds_dtheta;
    const double new_action = out.action + out.action_gain;
    out.action = new_action;
    out.x_star = chart.x_star_for_action(new_action);
    out.theta = theta + delta + eps * ds_di;
    return out;
}

} // namespace hill4bp
