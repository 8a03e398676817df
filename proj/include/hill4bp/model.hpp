#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>

namespace hill4bp {

/// Default mass ratio: the Sun-Jupiter value. The reference Lyapunov-family
/// data pins it to 9.537e-4 (all published digits reproduce to ~1e-8 with
/// this value; the coarser 0.00095 misses them by several 1e-6).
inline constexpr double kDefaultMu = 9.537e-4;
inline constexpr double kDefaultEps = 0.0;

/// Model constants of the circular/elliptic Hill four-body problem.
/// Derived fields are closed forms of (mu, eps):
///   d = sqrt(1 - 3 mu + 3 mu^2),  lambda_{1,2} = (3/2)(1 -/+ d),
///   a = (1 - lambda2)/2,          b = (1 - lambda1)/2.
struct ModelParams {
    double mu = kDefaultMu;
    double eps = kDefaultEps;
    double d = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double a = 0.0;
    double b = 0.0;
};

ModelParams derive_params(double mu, double eps);

/// key=value plain-text config with keys mu, eps. Unknown keys are ignored
/// so the same file can carry pipeline settings.
ModelParams params_from_config(std::istream& in);
ModelParams params_from_config_file(const std::string& path);
void write_params_config(std::ostream& out, const ModelParams& p);

/// Point of the 4D phase space in momentum coordinates.
/// Velocities: xdot = px + y, ydot = py - x.
struct PhaseState {
    double x = 0.0;
    double y = 0.0;
    double px = 0.0;
    double py = 0.0;

    double xdot() const { return px + y; }
    double ydot() const { return py - x; }
    double r() const { return std::sqrt(x * x + y * y); }

    std::array<double, 4> to_array() const { return {x, y, px, py}; }
    static PhaseState from_array(const std::array<double, 4>& v) {
        return {v[0], v[1], v[2], v[3]};
    }
    static PhaseState from_velocities(double x, double y, double xdot, double ydot) {
        return {x, y, xdot - y, ydot + x};
    }
};

inline double distance(const PhaseState& a, const PhaseState& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dpx = a.px - b.px, dpy = a.py - b.py;
    return std::sqrt(dx * dx + dy * dy + dpx * dpx + dpy * dpy);
}

/// Phase point extended with the 2*pi-periodic forcing phase s.
struct ExtendedState {
    PhaseState z;
    double s = 0.0;

    static double wrap_phase(double s);
};

/// Discrete symmetries in momentum coordinates.
///   S  : (x, y, px, py) -> (x, -y, -px, py),   time reversing
///   S' : (x, y, px, py) -> (-x, y, px, -py),   time reversing
///   S'' = S o S' : full sign flip, not time reversing
enum class Symmetry { S, Sprime, Sdoubleprime };

PhaseState apply_symmetry(const PhaseState& z, Symmetry which);
bool reverses_time(Symmetry which);

} // namespace hill4bp
