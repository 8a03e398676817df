#pragma once

#include <memory>
#include <vector>

#include "hill4bp/connections.hpp"

namespace hill4bp {

struct MelnikovConfig {
    double tail_cut = 1e-12;   // truncation level of the bracketed difference
    double quad_tol = 1e-9;    // adaptive quadrature tolerance per leg
    double max_horizon = 40.0; // hard cap on |t|, in source-orbit periods

    void validate() const {
        if (!(tail_cut > 0.0 && quad_tol > 0.0 && max_horizon > 0.0))
            throw ParameterError("melnikov config values must be positive");
        if (!(tail_cut < quad_tol))
            throw ParameterError("tail_cut must be below quad_tol");
    }
};

/// Evaluator of the connection orbit z(tau) (tau = 0 at the symmetric
/// connection point) built from the unstable-branch seed provenance:
///  - numeric core between the seed and the connection point,
///  - linear Floquet asymptote beyond the seed (backward tail),
///  - time-reversing symmetry image for the forward half.
/// The asymptote keeps the far tails accurate where direct propagation
/// would be destroyed by hyperbolic error growth.
class ConnectionSampler {
  public:
    ConnectionSampler(const ConnectionPoint& conn, const ModelParams& p,
                      const IntegratorConfig& cfg, const MelnikovConfig& mcfg);

    PhaseState eval(double tau) const;
    double h1_at(double tau) const;

    const ConnectionPoint& connection() const { return conn_; }
    const PeriodicOrbit& source() const { return *conn_.candidate.source_orbit; }
    const PeriodicOrbit& target() const { return *conn_.candidate.target_orbit; }
    double period() const { return source().period; }
    /// |tau| beyond which the bracketed Melnikov difference stays below
    /// tail_cut.
    double tau_cut() const { return tau_cut_; }
    Symmetry reflection() const { return sym_; }

    /// Bracketed difference H1(z(tau)) - H1(asymptotic orbit point), using
    /// the phase matched to the decaying side of tau.
    double bracketed_difference(double tau) const;

  private:
    PhaseState eval_backward(double tau) const;  // tau <= 0

    ConnectionPoint conn_;
    ModelParams params_;
    Symmetry sym_ = Symmetry::S;
    double flight_time_ = 0.0;
    double theta_seed_ = 0.0;
    double displacement_ = 0.0;
    int branch_sign_ = +1;
    double tau_cut_ = 0.0;
    Trajectory<4> core_;  // seed -> connection point
};

double melnikov_S(const ConnectionSampler& zs, double theta, const ModelParams& p,
                  const MelnikovConfig& mcfg);

/// (d/dtheta) S(sigma_0(x*, theta)); the diffusion conditions consume the
/// negation of this value.
double melnikov_dS_dtheta_composed(const ConnectionSampler& zs, double theta,
                                   const ModelParams& p, const MelnikovConfig& mcfg);

/// Grid of S and dS o sigma_0 values over (x*, theta) for one channel,
/// together with the per-x* channel scalars needed to evaluate the
/// first-order map. Plain data; serializes to the chart artifact.
struct ScatteringChart {
    ChannelLabel label = ChannelLabel::HomZ1;
    std::vector<double> x_grid;          // |x*| per channel node
    std::vector<double> theta_grid;      // uniform
    std::vector<std::vector<double>> s_values;     // [ix][itheta]
    std::vector<std::vector<double>> ds_composed;  // [ix][itheta]
    // channel scalars per x_grid entry
    std::vector<double> deltas;          // unreduced Delta = -2 theta-
    std::vector<double> theta_minus;     // representative in (-1, 0]
    std::vector<double> periods;
    std::vector<double> energies;
    std::vector<double> actions;
    MelnikovConfig mcfg;
    std::size_t failed_points = 0;

    double theta_lo() const { return theta_grid.front(); }
    double theta_hi() const { return theta_grid.back(); }

    double interp_ds(double x_star, double theta) const;
    double interp_s(double x_star, double theta) const;
    double interp_delta(double x_star) const;
    double interp_action(double x_star) const;
    /// dI/dx* = T dh/dx* at x*.
    double action_slope(double x_star) const;
    /// x* with the given action (monotone inversion over the grid range).
    double x_star_for_action(double action) const;
};

ScatteringChart build_chart(const Channel& channel, const std::vector<double>& theta_grid,
                            const ModelParams& p, const IntegratorConfig& cfg,
                            const MelnikovConfig& mcfg);

/// First-order perturbed scattering map in (x*, theta):
///   I' = I - eps dS/dtheta (sigma_0), theta' = theta + Delta + eps dS/dI (sigma_0).
/// The composed argument theta + Delta is wrapped into the chart window.
struct ScatteringStep {
    double x_star;
    double theta;
    double action;
    double action_gain;  // signed first-order action increment
};
ScatteringStep scattering_map_first_order(const ScatteringChart& chart, double x_star,
                                          double theta, double eps);

} // namespace hill4bp
