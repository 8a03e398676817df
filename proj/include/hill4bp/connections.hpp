#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hill4bp/manifolds.hpp"

namespace hill4bp {

/// Connection point with wave-map data: foot-points z+/- on the target and
/// source orbits and their angle-chart phases. Phases are stored both
/// unreduced (as real numbers, for window bookkeeping) and reduced mod 1.
struct ConnectionPoint {
    ConnectionCandidate candidate;
    double theta_minus = 0.0;  // representative in (-1, 0], source-orbit chart
    double theta_plus = 0.0;   // representative in [0, 1), target-orbit chart
    double delta_unreduced = 0.0;  // theta_plus - theta_minus as computed
    double delta = 0.0;            // reduced to [0,1)
    PhaseState z_minus, z_plus;
    double min_phase_distance = 0.0;  // achieved by the asymptotic cross-check
};

enum class FootpointMethod {
    /// Seed provenance: theta- = theta_seed + flight_time/T on the source
    /// chart, theta+ by the reversing symmetry. Accuracy is limited only by
    /// the cut-refinement accuracy.
    Provenance,
    /// Direct phase matching along the asymptotic legs. Its floor is set by
    /// hyperbolic error amplification (~sqrt of the connection-point error),
    /// so it serves as a cross-check of the provenance values.
    Asymptotic,
};

ConnectionPoint compute_footpoints(const ConnectionCandidate& cand, const ModelParams& p,
                                   const IntegratorConfig& cfg,
                                   FootpointMethod method = FootpointMethod::Provenance);

/// Minimizing phase of the distance from z to the orbit's point set.
struct PhaseFit {
    double theta;
    double dist;
};
PhaseFit closest_orbit_phase(const PhaseState& z, const PeriodicOrbit& orbit);

/// Asymptotic phase of the leg from z (forward toward the target orbit or
/// backward toward the source orbit). Stops when the distance reaches
/// target_dist or starts growing again; returns the estimate at closest
/// approach.
struct AsymptoticPhase {
    double theta;       // asymptotic phase, mod 1
    double min_dist;
    double t_at_min;
};
AsymptoticPhase asymptotic_phase(const PhaseState& z, const PeriodicOrbit& orbit,
                                 bool forward, const ModelParams& p,
                                 const IntegratorConfig& cfg, double target_dist = 1e-9,
                                 double horizon_periods = 12.0);

double phase_shift(const ConnectionPoint& conn);

enum class ChannelLabel { HomZ1, HomZ2, HetZ1, HetZ2 };
const char* channel_label_name(ChannelLabel label);
ChannelLabel channel_label_from_name(const std::string& name);

struct ChannelNode {
    std::shared_ptr<const PeriodicOrbit> source;  // unstable-side orbit
    std::shared_ptr<const PeriodicOrbit> target;  // stable-side orbit
    ConnectionPoint conn;
    double x_star() const { return std::abs(source->x_star); }
};

/// A homoclinic/heteroclinic channel tracked over the family grid, with a
/// common window offset theta*: the angle window is
/// (theta- + theta_star, theta- + 1 + theta_star) at each x*.
struct Channel {
    ChannelLabel label = ChannelLabel::HomZ1;
    double theta_star = 0.0;
    std::vector<ChannelNode> nodes;  // ascending x*

    bool heteroclinic() const {
        return label == ChannelLabel::HetZ1 || label == ChannelLabel::HetZ2;
    }
    int point_index() const {
        return (label == ChannelLabel::HomZ1 || label == ChannelLabel::HetZ1) ? 0 : 1;
    }
};

struct ChannelBuildConfig {
    double displacement = 1e-6;
    int n_seeds = 2000;
    double sym_tol = 1e-9;
    double delta_jump_tol = 0.2;  // branch-jump detector on Delta continuity
};

/// Builds the labeled channel over an L1 family (and its S'-mirror family
/// for heteroclinic labels). Homoclinic points come from the 1st guarded
/// S_x cut of the inner unstable branch; heteroclinic points from the 2nd
/// guarded S_y cut of the L2 orbit's inner unstable branch.
Channel build_channel(const OrbitFamily& l1_family, ChannelLabel label, double theta_star,
                      const ModelParams& p, const IntegratorConfig& cfg,
                      const ChannelBuildConfig& bc = {});

} // namespace hill4bp
