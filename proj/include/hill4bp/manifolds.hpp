#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "hill4bp/integrate.hpp"
#include "hill4bp/orbits.hpp"

namespace hill4bp {

enum class ManifoldKind { Stable, Unstable };

/// Linear-approximation seeds of one side of a manifold tube: at each phase
/// theta the monodromy eigenvector is transported by the STM, normalized,
/// and the state displaced by +/- displacement along it.
struct ManifoldBranch {
    std::shared_ptr<const PeriodicOrbit> orbit;
    ManifoldKind kind = ManifoldKind::Unstable;
    int branch_sign = +1;
    double displacement = 1e-6;
    std::vector<double> seed_phases;
    std::vector<PhaseState> seeds;
    std::vector<double> seed_energy_errors;  // |H(seed) - H(orbit)|
};

PhaseState manifold_seed(const PeriodicOrbit& orbit, ManifoldKind kind, int branch_sign,
                         double displacement, double theta);

ManifoldBranch seed_manifold(std::shared_ptr<const PeriodicOrbit> orbit, ManifoldKind kind,
                             int branch_sign, double displacement, int n_seeds,
                             const ModelParams& p, const IntegratorConfig& cfg);

/// Picks the branch sign whose seeds leave toward the tertiary (the inner
/// region). Probes one seed per sign.
int inner_branch_sign(const PeriodicOrbit& orbit, ManifoldKind kind,
                      const ModelParams& p, const IntegratorConfig& cfg);

struct CutPoint {
    double theta_seed = 0.0;
    double flight_time = 0.0;  // signed propagation time to the crossing
    PhaseState state;
    bool tangential = false;
    bool fold_next = false;  // resolution break between this and the next point
};

struct SectionCut {
    std::shared_ptr<const PeriodicOrbit> orbit;
    SectionSpec section;
    int cut_index = 1;
    ManifoldKind kind = ManifoldKind::Unstable;
    int branch_sign = +1;
    double displacement = 1e-6;
    std::vector<CutPoint> points;          // ordered by seed phase
    std::vector<double> dropped_phases;    // seeds lost to collision/no-crossing
};

SectionCut globalize_to_cut(const ManifoldBranch& branch, const SectionSpec& section,
                            int cut_index, const ModelParams& p,
                            const IntegratorConfig& cfg);

/// Zero-velocity-tangency locus on S_x at energy h: points with y = 0,
/// ydot = 0 and H = h, i.e. xdot^2 = 2 (h + Omega_eff(x, 0)).
struct TangencySample {
    double x;
    double xdot;
};
std::vector<TangencySample> tangency_curve(double h, const ModelParams& p, double x_lo,
                                           double x_hi, int n);

enum class ConnectionType { Homoclinic, Heteroclinic };

struct ConnectionCandidate {
    PhaseState state;
    ConnectionType type = ConnectionType::Homoclinic;
    bool symmetric = true;
    double sym_residual = 0.0;  // |px| on S_x, |py| on S_y

    // provenance on the unstable branch: state = phi^(flight_time)(seed)
    std::shared_ptr<const PeriodicOrbit> source_orbit;  // unstable side
    std::shared_ptr<const PeriodicOrbit> target_orbit;  // stable side
    double theta_seed = 0.0;
    double flight_time = 0.0;
    int branch_sign = +1;
    double displacement = 1e-6;
    int cut_index = 1;
    SectionSpec section;
};

/// Locates symmetric intersections on an unstable-branch cut: sign changes
/// of px (S_x) or py (S_y) along the cut, refined by re-integrating from
/// phase-interpolated seeds. target_orbit names the stable-side orbit
/// (equal to the cut's orbit for homoclinic cuts).
std::vector<ConnectionCandidate> find_symmetric_connection(
    const SectionCut& cut, std::shared_ptr<const PeriodicOrbit> target_orbit,
    const ModelParams& p, const IntegratorConfig& cfg, double sym_tol = 1e-9);

/// Angle in radians between the two cut curves at the candidate, measured in
/// the section plane.
double transversality_angle(const SectionCut& cut_u, const SectionCut& cut_s,
                            const ConnectionCandidate& candidate, const ModelParams& p,
                            const IntegratorConfig& cfg);

} // namespace hill4bp
