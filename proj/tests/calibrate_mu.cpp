// Calibration scan: which mass ratio reproduces the published Lyapunov
// family rows. Not part of the test suite; run by hand.
#include <cstdio>

#include "hill4bp/orbits.hpp"
#include "hill4bp/reference_data.hpp"

using namespace hill4bp;

namespace {

void report(double mu) {
    const ModelParams p = derive_params(mu, 0.0);
    IntegratorConfig cfg;
    std::printf("mu = %.12g  (d=%.12g lambda2=%.12g)\n", mu, p.d, p.lambda2);
    const auto pts = lagrange_points(p);
    std::printf("  h(L1) = %.10f  (ref %.5f)\n", pts[0].energy, reference::kEnergyL1);
    for (const auto& ref : reference::kLyapunovFamily) {
        try {
            const PeriodicOrbit orb =
                correct_symmetric_orbit(ref.x_star, linear_py_guess(ref.x_star, p), p, cfg);
            std::printf(
                "  x*=%.3f: ydot*=%.10f (d %.2e)  T=%.10f (d %.2e)  h=%.10f (d %.2e)\n",
                ref.x_star, orb.ydot_star(), orb.ydot_star() - ref.ydot_star, orb.period,
                orb.period - ref.period, orb.energy, orb.energy - ref.h);
        } catch (const std::exception& e) {
            std::printf("  x*=%.3f: FAILED (%s)\n", ref.x_star, e.what());
        }
    }
}

// Secant on mu so that h(x*=0.615) matches the published value.
double fit_mu() {
    IntegratorConfig cfg;
    auto h_of = [&](double mu) {
        const ModelParams p = derive_params(mu, 0.0);
        const PeriodicOrbit orb =
            correct_symmetric_orbit(0.615, linear_py_guess(0.615, p), p, cfg);
        return orb.energy - reference::kLyapunovFamily[0].h;
    };
    double a = 0.00095, b = 0.000954;
    double fa = h_of(a), fb = h_of(b);
    for (int i = 0; i < 40; ++i) {
        const double c = b - fb * (b - a) / (fb - fa);
        a = b; fa = fb;
        b = c; fb = h_of(c);
        if (std::abs(fb) < 1e-13) break;
    }
    return b;
}

} // namespace

int main() {
    report(0.00095);
    report(0.00095388);
    const double fitted = fit_mu();
    std::printf("\nfitted mu (h at x*=0.615): %.12g\n\n", fitted);
    report(fitted);
    return 0;
}
