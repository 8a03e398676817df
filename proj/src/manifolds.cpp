#include "hill4bp/manifolds.hpp"

#include <algorithm>
#include <cmath>

#include "hill4bp/errors.hpp"
#include "hill4bp/fields.hpp"
#include "hill4bp/parallel.hpp"

namespace hill4bp {

namespace {

Vec4 unit_eigvec_at(const PeriodicOrbit& orbit, ManifoldKind kind, double theta) {
    const Vec4 v = kind == ManifoldKind::Unstable
                       ? transported_unstable(orbit, theta * orbit.period)
                       : transported_stable(orbit, theta * orbit.period);
    double n = 0.0;
    for (double c : v) n += c * c;
    n = std::sqrt(n);
    Vec4 u = v;
    for (double& c : u) c /= n;
    return u;
}

double symmetry_coordinate(const SectionSpec& section, const PhaseState& z) {
    if (section.name == "Sy") return z.py;
    return z.px;  // S_x and plain y=0 sections
}

} // namespace

PhaseState manifold_seed(const PeriodicOrbit& orbit, ManifoldKind kind, int branch_sign,
                         double displacement, double theta) {
    const PhaseState base = k0_param(orbit, theta);
    const Vec4 u = unit_eigvec_at(orbit, kind, theta);
    const double s = branch_sign >= 0 ? 1.0 : -1.0;
    return {base.x + s * displacement * u[0], base.y + s * displacement * u[1],
            base.px + s * displacement * u[2], base.py + s * displacement * u[3]};
}

ManifoldBranch seed_manifold(std::shared_ptr<const PeriodicOrbit> orbit, ManifoldKind kind,
                             int branch_sign, double displacement, int n_seeds,
                             const ModelParams& p, const IntegratorConfig& cfg) {
    (void)cfg;
    if (!(orbit->lambda_unstable > 1.0 + 1e-9))
        throw SeedingError("orbit monodromy is not hyperbolic");
    if (n_seeds < 1) throw ParameterError("n_seeds must be >= 1");
    ManifoldBranch br;
    br.orbit = std::move(orbit);
    br.kind = kind;
    br.branch_sign = branch_sign >= 0 ? +1 : -1;
    br.displacement = displacement;
    br.seed_phases.resize(n_seeds);
    br.seeds.resize(n_seeds);
    br.seed_energy_errors.resize(n_seeds);
    const double h0 = br.orbit->energy;
    for (int i = 0; i < n_seeds; ++i) {
        const double theta = static_cast<double>(i) / n_seeds;
        br.seed_phases[i] = theta;
        br.seeds[i] = manifold_seed(*br.orbit, kind, br.branch_sign, displacement, theta);
        br.seed_energy_errors[i] = std::abs(energy_ch4bp(br.seeds[i], p) - h0);
    }
    return br;
}

int inner_branch_sign(const PeriodicOrbit& orbit, ManifoldKind kind, const ModelParams& p,
                      const IntegratorConfig& cfg) {
    const bool backward = (kind == ManifoldKind::Stable);
    const double x_split = 0.5 * std::abs(orbit.x_star);
    for (int sign : {+1, -1}) {
        const PhaseState seed = manifold_seed(orbit, kind, sign, 1e-5, 0.25);
        Ch4bpField f{p, cfg.r_min};
        IntegratorConfig pcfg = cfg;
        pcfg.max_time = 12.0 * orbit.period;
        Dop853Stepper<4, Ch4bpField> stepper(f, pcfg, 0.0, seed.to_array(),
                                             backward ? -1.0 : 1.0);
        DenseStep<4> rec;
        const double t_limit = backward ? -pcfg.max_time : pcfg.max_time;
        while (stepper.advance(t_limit, rec)) {
            const double x = stepper.y()[0];
            if (std::abs(x) < x_split) return sign;                   // heads inward
            if (std::abs(x) > 2.0 * std::abs(orbit.x_star)) break;    // heads outward
        }
    }
    throw SeedingError("no branch sign reaches the inner region");
}

SectionCut globalize_to_cut(const ManifoldBranch& branch, const SectionSpec& section,
                            int cut_index, const ModelParams& p,
                            const IntegratorConfig& cfg) {
    SectionCut cut;
    cut.orbit = branch.orbit;
    cut.section = section;
    cut.cut_index = cut_index;
    cut.kind = branch.kind;
    cut.branch_sign = branch.branch_sign;
    cut.displacement = branch.displacement;

    const bool backward = (branch.kind == ManifoldKind::Stable);
    const std::size_t n = branch.seeds.size();
    std::vector<std::optional<CutPoint>> results(n);
    IntegratorConfig pcfg = cfg;
    pcfg.max_time = std::min(cfg.max_time, 20.0 * branch.orbit->period);

    parallel_for(n, [&](std::size_t i) {
        Ch4bpField f{p, pcfg.r_min};
        try {
            const Crossing c = flow_to_section<4>(f, branch.seeds[i].to_array(), 0.0,
                                                  section, cut_index, pcfg, backward);
            CutPoint pt;
            pt.theta_seed = branch.seed_phases[i];
            pt.flight_time = c.t;
            pt.state = c.state;
            pt.tangential = c.tangential;
            results[i] = pt;
        } catch (const CollisionError&) {
            results[i] = std::nullopt;
        } catch (const NoCrossingError&) {
            results[i] = std::nullopt;
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        if (results[i])
            cut.points.push_back(*results[i]);
        else
            cut.dropped_phases.push_back(branch.seed_phases[i]);
    }
    if (cut.points.empty()) throw EmptyCutError("all manifold seeds failed to reach the cut");

    // resolution breaks: adjacent-point jumps well above the median spacing
    std::vector<double> gaps;
    auto section_gap = [](const CutPoint& a, const CutPoint& b) {
        return distance(a.state, b.state);
    };
    for (std::size_t i = 0; i + 1 < cut.points.size(); ++i)
        gaps.push_back(section_gap(cut.points[i], cut.points[i + 1]));
    if (!gaps.empty()) {
        std::vector<double> sorted = gaps;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double bound = std::max(10.0 * median, 0.02);
        for (std::size_t i = 0; i + 1 < cut.points.size(); ++i)
            cut.points[i].fold_next = gaps[i] > bound;
    }
    return cut;
}

std::vector<TangencySample> tangency_curve(double h, const ModelParams& p, double x_lo,
                                           double x_hi, int n) {
    std::vector<TangencySample> out;
    for (int i = 0; i < n; ++i) {
        const double x = x_lo + (x_hi - x_lo) * (n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
        if (x == 0.0) continue;
        const double v2 = 2.0 * (h + omega_eff(x, 0.0, p));
        if (v2 < 0.0) continue;
        const double v = std::sqrt(v2);
        out.push_back({x, v});
        if (v > 0.0) out.push_back({x, -v});
    }
    return out;
}

namespace {

struct CutEval {
    double sym;
    PhaseState state;
    double flight_time;
};

CutEval evaluate_cut_point(const SectionCut& cut, double theta, const ModelParams& p,
                           const IntegratorConfig& cfg) {
    const PhaseState seed =
        manifold_seed(*cut.orbit, cut.kind, cut.branch_sign, cut.displacement, theta);
    Ch4bpField f{p, cfg.r_min};
    IntegratorConfig pcfg = cfg;
    pcfg.max_time = std::min(cfg.max_time, 20.0 * cut.orbit->period);
    const bool backward = (cut.kind == ManifoldKind::Stable);
    const Crossing c =
        flow_to_section<4>(f, seed.to_array(), 0.0, cut.section, cut.cut_index, pcfg, backward);
    return {symmetry_coordinate(cut.section, c.state), c.state, c.t};
}

} // namespace

std::vector<ConnectionCandidate> find_symmetric_connection(
    const SectionCut& cut, std::shared_ptr<const PeriodicOrbit> target_orbit,
    const ModelParams& p, const IntegratorConfig& cfg, double sym_tol) {
    const bool het = (cut.section.name == "Sy");
    std::vector<ConnectionCandidate> out;

    // the seed phase is circular, so the (last, first) pair is also a bracket
    const std::size_t npts = cut.points.size();
    for (std::size_t i = 0; i < npts; ++i) {
        const std::size_t j = (i + 1) % npts;
        if (j == 0 && npts < 3) break;
        if (cut.points[i].fold_next) continue;
        const double ca = symmetry_coordinate(cut.section, cut.points[i].state);
        const double cb = symmetry_coordinate(cut.section, cut.points[j].state);
        if (!((ca < 0.0 && cb >= 0.0) || (ca > 0.0 && cb <= 0.0))) continue;

        double ta = cut.points[i].theta_seed;
        double tb = cut.points[j].theta_seed + (j == 0 ? 1.0 : 0.0);
        double fa = ca, fb = cb;
        CutEval best{};
        double theta_best = tb;
        bool have = false;
        for (int it = 0; it < 80; ++it) {
            // secant with bisection fallback
            double tc = tb - fb * (tb - ta) / (fb - fa);
            if (!(tc > std::min(ta, tb) && tc < std::max(ta, tb)))
                tc = 0.5 * (ta + tb);
            CutEval e;
            try {
                e = evaluate_cut_point(cut, tc, p, cfg);
            } catch (const std::exception&) {
                break;
            }
            have = true;
            best = e;
            theta_best = tc;
            if (std::abs(e.sym) < sym_tol) break;
            if ((e.sym < 0.0) == (fa < 0.0)) {
                ta = tc; fa = e.sym;
            } else {
                tb = tc; fb = e.sym;
            }
        }
        if (!have || std::abs(best.sym) >= sym_tol) continue;

        ConnectionCandidate cand;
        cand.state = best.state;
        cand.type = het ? ConnectionType::Heteroclinic : ConnectionType::Homoclinic;
        cand.symmetric = true;
        cand.sym_residual = std::abs(best.sym);
        cand.source_orbit = cut.orbit;
        cand.target_orbit = target_orbit ? target_orbit : cut.orbit;
        cand.theta_seed = theta_best;
        cand.flight_time = best.flight_time;
        cand.branch_sign = cut.branch_sign;
        cand.displacement = cut.displacement;
        cand.cut_index = cut.cut_index;
        cand.section = cut.section;
        out.push_back(cand);
    }

    // order by the section coordinate (x on S_x, y on S_y), ascending
    std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
        const double ka = het ? a.state.y : a.state.x;
        const double kb = het ? b.state.y : b.state.x;
        return ka < kb;
    });
    return out;
}

double transversality_angle(const SectionCut& cut_u, const SectionCut& cut_s,
                            const ConnectionCandidate& candidate, const ModelParams& p,
                            const IntegratorConfig& cfg) {
    const bool het = (candidate.section.name == "Sy");
    auto plane_coords = [&](const PhaseState& z) {
        // (x, xdot) on S_x; (y, ydot) on S_y
        return het ? std::array<double, 2>{z.y, z.ydot()}
                   : std::array<double, 2>{z.x, z.xdot()};
    };
    auto tangent_on = [&](const SectionCut& cut) {
        // nearest cut point to the candidate in the section plane
        const auto c0 = plane_coords(candidate.state);
        double best_d = 1e300;
        double theta0 = 0.0;
        for (const auto& pt : cut.points) {
            const auto c = plane_coords(pt.state);
            const double d = std::hypot(c[0] - c0[0], c[1] - c0[1]);
            if (d < best_d) { best_d = d; theta0 = pt.theta_seed; }
        }
        const double dth = 0.5 / static_cast<double>(std::max<std::size_t>(cut.points.size(), 2));
        const auto ea = evaluate_cut_point(cut, theta0 - dth, p, cfg);
        const auto eb = evaluate_cut_point(cut, theta0 + dth, p, cfg);
        const auto a = plane_coords(ea.state), b = plane_coords(eb.state);
        const double nx = b[0] - a[0], ny = b[1] - a[1];
        const double n = std::hypot(nx, ny);
        if (n < 1e-14) throw ResolutionError("cut tangent could not be resolved");
        return std::array<double, 2>{nx / n, ny / n};
    };
    const auto tu = tangent_on(cut_u);
    const auto ts = tangent_on(cut_s);
    const double cross = std::abs(tu[0] * ts[1] - tu[1] * ts[0]);
    const double dot = std::abs(tu[0] * ts[0] + tu[1] * ts[1]);
    return std::atan2(cross, dot);
}

} // namespace hill4bp
