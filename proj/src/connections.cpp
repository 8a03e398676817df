#include "hill4bp/connections.hpp"

#include <algorithm>
#include <cmath>

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

} // namespace

PhaseFit closest_orbit_phase(const PhaseState& z, const PeriodicOrbit& orbit) {
    const int n_coarse = 256;
    double best_theta = 0.0, best_d = 1e300;
    for (int i = 0; i < n_coarse; ++i) {
        const double th = static_cast<double>(i) / n_coarse;
        const double d = distance(z, k0_param(orbit, th));
        if (d < best_d) { best_d = d; best_theta = th; }
    }
    // ternary refinement on the bracketing interval
    double lo = best_theta - 1.0 / n_coarse, hi = best_theta + 1.0 / n_coarse;
    for (int it = 0; it < 80; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (distance(z, k0_param(orbit, m1)) < distance(z, k0_param(orbit, m2)))
            hi = m2;
        else
            lo = m1;
    }
    const double th = wrap_unit(0.5 * (lo + hi));
    return {th, distance(z, k0_param(orbit, th))};
}

AsymptoticPhase asymptotic_phase(const PhaseState& z, const PeriodicOrbit& orbit,
                                 bool forward, const ModelParams& p,
                                 const IntegratorConfig& cfg, double target_dist,
                                 double horizon_periods) {
    const double T = orbit.period;
    Ch4bpField f{p, cfg.r_min};
    IntegratorConfig pcfg = cfg;
    pcfg.max_time = horizon_periods * T + 1.0;
    Dop853Stepper<4, Ch4bpField> stepper(f, pcfg, 0.0, z.to_array(), forward ? 1.0 : -1.0);
    const double t_limit = forward ? pcfg.max_time : -pcfg.max_time;

    AsymptoticPhase best{0.0, 1e300, 0.0};
    int growth_run = 0;
    DenseStep<4> rec;
    while (stepper.advance(t_limit, rec)) {
        const double t = stepper.t();
        const PhaseState w = PhaseState::from_array(stepper.y());
        const PhaseFit fit = closest_orbit_phase(w, orbit);
        if (fit.dist < best.min_dist) {
            best.min_dist = fit.dist;
            best.t_at_min = t;
            best.theta = wrap_unit(fit.theta - t / T);
            growth_run = 0;
        } else if (best.min_dist < 0.2) {
            if (++growth_run > 25) break;  // past the closest approach
        }
        if (best.min_dist < target_dist) break;
    }
    if (best.min_dist > 0.2)
        throw FootpointError("leg does not approach the orbit");
    return best;
}

ConnectionPoint compute_footpoints(const ConnectionCandidate& cand, const ModelParams& p,
                                   const IntegratorConfig& cfg, FootpointMethod method) {
    const PeriodicOrbit& src = *cand.source_orbit;
    const PeriodicOrbit& tgt = *cand.target_orbit;
    ConnectionPoint conn;
    conn.candidate = cand;

    // theta- is stored with its representative in (-1, 0], matching the
    // published chart convention; theta+ = -theta- lies in [0, 1).
    if (method == FootpointMethod::Provenance) {
        if (!cand.symmetric)
            throw FootpointError("provenance foot-points require a symmetric candidate");
        const double theta_minus =
            wrap_unit(cand.theta_seed + cand.flight_time / src.period) - 1.0;
        conn.theta_minus = theta_minus;
        conn.theta_plus = -theta_minus;
        conn.delta_unreduced = -2.0 * theta_minus;
        conn.delta = wrap_unit(conn.delta_unreduced);
    } else {
        const AsymptoticPhase fwd = asymptotic_phase(cand.state, tgt, true, p, cfg);
        const AsymptoticPhase bwd = asymptotic_phase(cand.state, src, false, p, cfg);
        conn.theta_plus = fwd.theta;
        conn.theta_minus = wrap_unit(bwd.theta) - 1.0;
        conn.min_phase_distance = std::max(fwd.min_dist, bwd.min_dist);
        conn.delta_unreduced = conn.theta_plus - conn.theta_minus;
        conn.delta = wrap_unit(conn.delta_unreduced);
    }
    conn.z_minus = k0_param(src, conn.theta_minus);
    conn.z_plus = k0_param(tgt, conn.theta_plus);
    return conn;
}

double phase_shift(const ConnectionPoint& conn) {
    return conn.delta;
}

const char* channel_label_name(ChannelLabel label) {
    switch (label) {
        case ChannelLabel::HomZ1: return "hom-z1";
        case ChannelLabel::HomZ2: return "hom-z2";
        case ChannelLabel::HetZ1: return "het-z1";
        case ChannelLabel::HetZ2: return "het-z2";
    }
    return "?";
}

ChannelLabel channel_label_from_name(const std::string& name) {
    if (name == "hom-z1") return ChannelLabel::HomZ1;
    if (name == "hom-z2") return ChannelLabel::HomZ2;
    if (name == "het-z1") return ChannelLabel::HetZ1;
    if (name == "het-z2") return ChannelLabel::HetZ2;
    throw ParameterError("unknown channel label: " + name);
}

Channel build_channel(const OrbitFamily& l1_family, ChannelLabel label, double theta_star,
                      const ModelParams& p, const IntegratorConfig& cfg,
                      const ChannelBuildConfig& bc) {
    if (l1_family.orbits.empty()) throw ParameterError("empty family");
    Channel ch;
    ch.label = label;
    ch.theta_star = theta_star;
    const bool het = ch.heteroclinic();
    const int want = ch.point_index();

    const std::size_t n = l1_family.orbits.size();
    std::vector<ChannelNode> nodes(n);
    parallel_for(n, [&](std::size_t i) {
        auto l1 = std::make_shared<PeriodicOrbit>(l1_family.orbits[i]);
        std::shared_ptr<const PeriodicOrbit> source, target;
        SectionSpec section;
        int cut_index;
        if (het) {
            // unstable branch of the L2 orbit to the 2nd guarded S_y cut
            source = std::make_shared<PeriodicOrbit>(reflect_orbit_sprime(*l1, p, cfg));
            target = l1;
            section = SectionSpec::sy();
            cut_index = 2;
        } else {
            source = l1;
            target = l1;
            section = SectionSpec::sx();
            cut_index = 1;
        }
        const int sign = inner_branch_sign(*source, ManifoldKind::Unstable, p, cfg);
        const ManifoldBranch branch = seed_manifold(source, ManifoldKind::Unstable, sign,
                                                    bc.displacement, bc.n_seeds, p, cfg);
        const SectionCut cut = globalize_to_cut(branch, section, cut_index, p, cfg);
        const auto cands = find_symmetric_connection(cut, target, p, cfg, bc.sym_tol);
        if (static_cast<int>(cands.size()) <= want)
            throw ContinuationError("connection point " + std::string(channel_label_name(label)) +
                                    " not found at x*=" + std::to_string(l1->x_star));
        ChannelNode node;
        node.source = source;
        node.target = target;
        node.conn = compute_footpoints(cands[want], p, cfg);
        nodes[i] = std::move(node);
    });
    ch.nodes = std::move(nodes);

    for (std::size_t i = 0; i + 1 < ch.nodes.size(); ++i) {
        double dd = std::abs(ch.nodes[i + 1].conn.delta - ch.nodes[i].conn.delta);
        dd = std::min(dd, 1.0 - dd);
        if (dd > bc.delta_jump_tol)
            throw ContinuationError("branch jump detected in channel " +
                                    std::string(channel_label_name(label)));
    }
    return ch;
}

} // namespace hill4bp
