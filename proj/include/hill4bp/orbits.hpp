#pragma once

#include <array>
#include <complex>
#include <vector>

#include "hill4bp/integrate.hpp"
#include "hill4bp/model.hpp"

namespace hill4bp {

struct EquilibriumPoint {
    enum class Label { L1, L2, L3, L4 };
    enum class Stability { CenterSaddle, CenterCenter, ComplexSaddle };

    Label label;
    double x = 0.0;
    double y = 0.0;
    double energy = 0.0;
    Stability stability = Stability::CenterSaddle;
    std::array<std::complex<double>, 4> eigenvalues{};

    PhaseState state() const { return {x, y, -y, x}; }
    const char* label_name() const {
        switch (label) {
            case Label::L1: return "L1";
            case Label::L2: return "L2";
            case Label::L3: return "L3";
            case Label::L4: return "L4";
        }
        return "?";
    }
    const char* stability_name() const {
        switch (stability) {
            case Stability::CenterSaddle: return "center-saddle";
            case Stability::CenterCenter: return "center-center";
            case Stability::ComplexSaddle: return "complex-saddle";
        }
        return "?";
    }
};

std::array<EquilibriumPoint, 4> lagrange_points(const ModelParams& p);

/// True iff (x, y) is accessible at energy h: Omega_eff(x,y) >= -h.
bool hill_region_contains(double x, double y, double h, const ModelParams& p);

enum class FamilySide { L1, L2 };

/// Symmetric Lyapunov orbit anchored at its perpendicular x-axis crossing
/// q* = (x*, 0, 0, py*). For the L2 family the anchor is the S'-image
/// (x* < 0, py* < 0). Dense one-period trajectories of the state and of the
/// state-transition matrix start at the anchor.
struct PeriodicOrbit {
    FamilySide side = FamilySide::L1;
    double x_star = 0.0;
    double py_star = 0.0;
    double period = 0.0;
    double energy = 0.0;
    double action = 0.0;
    double return_error = 0.0;  // |phi^T(q*) - q*|
    Mat4 monodromy{};
    std::array<std::complex<double>, 4> monodromy_spectrum{};
    double lambda_unstable = 0.0;
    Vec4 unstable_eigvec{};  // at the anchor, unit norm
    Vec4 stable_eigvec{};
    Trajectory<4> path;
    Trajectory<20> var_path;

    PhaseState anchor() const { return {x_star, 0.0, 0.0, py_star}; }
    double ydot_star() const { return py_star - x_star; }
    double omega() const { return 1.0 / period; }
};

/// Corrects py* (x* held fixed) so the half-period x-axis crossing is
/// perpendicular, then characterizes the orbit (period, energy, action,
/// monodromy). residual_tol bounds |p_x| at the half-period crossing.
PeriodicOrbit correct_symmetric_orbit(double x_star, double py_guess,
                                      const ModelParams& p, const IntegratorConfig& cfg,
                                      double residual_tol = 1e-11);

/// Initial anchor momentum from the linear center mode at L1; valid for
/// small orbits, used to bootstrap continuation.
double linear_py_guess(double x_star, const ModelParams& p);

struct OrbitFamily {
    FamilySide side = FamilySide::L1;
    std::vector<PeriodicOrbit> orbits;  // ordered by |x*| ascending
};

/// Natural-parameter continuation over |x*| in [x_lo, x_hi] with the given
/// step. The L2 family is the S'-reflection of the L1 family.
OrbitFamily continue_family(double x_lo, double x_hi, double step, FamilySide side,
                            const ModelParams& p, const IntegratorConfig& cfg);

/// Root-finds x* so that the corrected orbit has the requested energy.
PeriodicOrbit orbit_for_energy(double h, FamilySide side, const ModelParams& p,
                               const IntegratorConfig& cfg, double h_tol = 1e-10);

/// k0(I, theta) = phi^(theta T)(q*); theta is taken mod 1.
PhaseState k0_param(const PeriodicOrbit& orbit, double theta);

/// STM from the anchor over t in [0, T].
Mat4 stm_at(const PeriodicOrbit& orbit, double t);

/// Variational transport of the anchor monodromy eigenvectors to arbitrary
/// real time, using the Floquet relation across periods. Not normalized.
Vec4 transported_unstable(const PeriodicOrbit& orbit, double t);
Vec4 transported_stable(const PeriodicOrbit& orbit, double t);

PeriodicOrbit reflect_orbit_sprime(const PeriodicOrbit& l1_orbit, const ModelParams& p,
                                   const IntegratorConfig& cfg);

} // namespace hill4bp
