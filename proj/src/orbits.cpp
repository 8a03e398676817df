#include "hill4bp/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "hill4bp/errors.hpp"
#include "hill4bp/fields.hpp"

namespace hill4bp {

namespace {

// Linearization on a symmetry axis (Omega_xy = 0 there): the exponents
// solve s^4 + (4 - Oxx - Oyy) s^2 + Oxx Oyy = 0.
void axis_linearization(double oxx, double oyy, std::array<std::complex<double>, 4>& eig,
                        EquilibriumPoint::Stability& stab) {
    const std::complex<double> disc =
        std::sqrt(std::complex<double>((4.0 - oxx - oyy) * (4.0 - oxx - oyy) -
                                       4.0 * oxx * oyy));
    const std::complex<double> s2a = 0.5 * (-(4.0 - oxx - oyy) + disc);
    const std::complex<double> s2b = 0.5 * (-(4.0 - oxx - oyy) - disc);
    const auto root = [](const std::complex<double>& s2) { return std::sqrt(s2); };
    eig = {root(s2a), -root(s2a), root(s2b), -root(s2b)};
    const bool real_roots = std::abs(disc.imag()) < 1e-14;
    if (!real_roots) {
        stab = EquilibriumPoint::Stability::ComplexSaddle;
    } else if (s2a.real() < 0.0 && s2b.real() < 0.0) {
        stab = EquilibriumPoint::Stability::CenterCenter;
    } else if (s2a.real() > 0.0 && s2b.real() > 0.0) {
        stab = EquilibriumPoint::Stability::ComplexSaddle;  // does not occur here
    } else {
        stab = EquilibriumPoint::Stability::CenterSaddle;
    }
}

// Null vector of (M - lambda I) by elimination with partial pivoting.
Vec4 eigenvector_for(const Mat4& m, double lambda) {
    double a[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a[i][j] = m[i][j] - (i == j ? lambda : 0.0);
    int perm[4] = {0, 1, 2, 3};
    int rank = 0;
    for (int col = 0; col < 4 && rank < 3; ++col) {
        int piv = -1;
        double best = 1e-9;
        for (int r = rank; r < 4; ++r)
            if (std::abs(a[r][col]) > best) { best = std::abs(a[r][col]); piv = r; }
        if (piv < 0) continue;
        std::swap_ranges(a[rank], a[rank] + 4, a[piv]);
        std::swap(perm[rank], perm[piv]);
        for (int r = rank + 1; r < 4; ++r) {
            const double f = a[r][col] / a[rank][col];
            for (int j = col; j < 4; ++j) a[r][j] -= f * a[rank][j];
        }
        ++rank;
    }
    // Free variable: take the trailing coordinate, back-substitute.
    Vec4 v{};
    v[3] = 1.0;
    for (int r = rank - 1; r >= 0; --r) {
        int lead = -1;
        for (int j = 0; j < 4; ++j)
            if (std::abs(a[r][j]) > 1e-9) { lead = j; break; }
        if (lead < 0 || lead == 3) continue;
        double s = 0.0;
        for (int j = lead + 1; j < 4; ++j) s += a[r][j] * v[j];
        v[lead] = -s / a[r][lead];
    }
    double n = 0.0;
    for (double c : v) n += c * c;
    n = std::sqrt(n);
    for (double& c : v) c /= n;
    // deterministic orientation
    int big = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(v[i]) > std::abs(v[big])) big = i;
    if (v[big] < 0.0)
        for (double& c : v) c = -c;
    return v;
}

struct HalfPeriodCrossing {
    double t;
    Vec20 y;
};

HalfPeriodCrossing half_period_crossing(const PhaseState& anchor, const ModelParams& p,
                                        const IntegratorConfig& cfg) {
    IntegratorConfig ecfg = cfg;
    ecfg.max_time = 20.0;
    VariationalField f{p, cfg.r_min};
    const auto c = flow_to_section_full<20>(f, variational_initial(anchor), 0.0,
                                            SectionSpec::y_zero(), 1, ecfg);
    return {c.t, c.y};
}

} // namespace

std::array<EquilibriumPoint, 4> lagrange_points(const ModelParams& p) {
    const double x1 = std::pow(p.lambda2, -1.0 / 3.0);
    const double y3 = std::pow(p.lambda1, -1.0 / 3.0);
    std::array<EquilibriumPoint, 4> out;

    auto fill = [&](EquilibriumPoint& e, EquilibriumPoint::Label lab, double x, double y) {
        e.label = lab;
        e.x = x;
        e.y = y;
        e.energy = -omega_eff(x, y, p);
        const double r2 = x * x + y * y;
        const double r = std::sqrt(r2);
        const double inv_r3 = 1.0 / (r2 * r);
        const double inv_r5 = inv_r3 / r2;
        const double oxx = p.lambda2 - inv_r3 + 3.0 * x * x * inv_r5;
        const double oyy = p.lambda1 - inv_r3 + 3.0 * y * y * inv_r5;
        axis_linearization(oxx, oyy, e.eigenvalues, e.stability);
    };

    fill(out[0], EquilibriumPoint::Label::L1, x1, 0.0);
    fill(out[1], EquilibriumPoint::Label::L2, -x1, 0.0);
    fill(out[2], EquilibriumPoint::Label::L3, 0.0, y3);
    fill(out[3], EquilibriumPoint::Label::L4, 0.0, -y3);
    return out;
}

bool hill_region_contains(double x, double y, double h, const ModelParams& p) {
    return omega_eff(x, y, p) >= -h;
}

double linear_py_guess(double x_star, const ModelParams& p) {
    const double sign = x_star >= 0.0 ? 1.0 : -1.0;
    const double xl = std::pow(p.lambda2, -1.0 / 3.0) * sign;
    const double r2 = xl * xl;
    const double inv_r3 = 1.0 / (r2 * std::abs(xl));
    const double oxx = p.lambda2 + 2.0 * inv_r3;
    const double oyy = p.lambda1 - inv_r3;
    // center frequency nu and mode slope: (xi, eta) = (cos nu t, b sin nu t)
    const double q = 4.0 - oxx - oyy;
    const double s2 = 0.5 * (-q - std::sqrt(q * q - 4.0 * oxx * oyy));
    const double nu = std::sqrt(-s2);
    const double b = -(nu * nu + oxx) / (2.0 * nu);
    const double amp = xl - x_star;  // signed displacement toward the tertiary
    const double ydot = amp * (-b) * nu;  // at the left crossing of the loop
    return ydot + x_star;
}

PeriodicOrbit correct_symmetric_orbit(double x_star, double py_guess, const ModelParams& p,
                                      const IntegratorConfig& cfg, double residual_tol) {
    double py = py_guess;
    double t_half = 0.0;
    bool converged = false;
    for (int it = 0; it < 40; ++it) {
        HalfPeriodCrossing hc;
        try {
            hc = half_period_crossing({x_star, 0.0, 0.0, py}, p, cfg);
        } catch (const NoCrossingError&) {
            throw CorrectionError("trajectory lost the section during correction at x*=" +
                                  std::to_string(x_star));
        }
        const PhaseState zc = state_part(hc.y);
        const double residual = zc.px;
        t_half = hc.t;
        if (std::abs(residual) < residual_tol) { converged = true; break; }
        const Mat4 m = stm_part(hc.y);
        const PhaseState dz = field_ch4bp(zc, p);
        if (std::abs(dz.y) < 1e-12)
            throw CorrectionError("tangential section crossing during correction");
        const double dres = m[2][3] - dz.px * m[1][3] / dz.y;
        if (std::abs(dres) < 1e-14)
            throw CorrectionError("singular correction derivative");
        py -= residual / dres;
    }
    if (!converged)
        throw CorrectionError("Newton correction did not converge at x*=" +
                              std::to_string(x_star));

    PeriodicOrbit orb;
    orb.side = x_star >= 0.0 ? FamilySide::L1 : FamilySide::L2;
    orb.x_star = x_star;
    orb.py_star = py;
    orb.period = 2.0 * t_half;
    const PhaseState anchor = orb.anchor();
    orb.energy = energy_ch4bp(anchor, p);

    VariationalField vf{p, cfg.r_min};
    orb.var_path = propagate<20>(vf, variational_initial(anchor), 0.0, orb.period, cfg);
    const Vec20 end = orb.var_path.at(orb.period);
    orb.monodromy = stm_part(end);
    orb.return_error = distance(state_part(end), anchor);

    Ch4bpField f4{p, cfg.r_min};
    orb.path = propagate<4>(f4, anchor.to_array(), 0.0, orb.period, cfg);

    ActionField af{p, cfg.r_min};
    const Vec5 a0{anchor.x, anchor.y, anchor.px, anchor.py, 0.0};
    const auto apath = propagate<5>(af, a0, 0.0, orb.period, cfg);
    orb.action = std::abs(apath.at(orb.period)[4]);

    // Monodromy spectrum from the reciprocal-pair reduction: with
    // u = lambda + 1/lambda, u^2 - (tr M) u + (B - 2) = 0 where
    // B = ((tr M)^2 - tr(M^2))/2.
    const Mat4& m = orb.monodromy;
    double tr = 0.0, tr2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        tr += m[i][i];
        for (int j = 0; j < 4; ++j) tr2 += m[i][j] * m[j][i];
    }
    const double bsum = 0.5 * (tr * tr - tr2);
    const std::complex<double> udisc = std::sqrt(std::complex<double>(tr * tr - 4.0 * (bsum - 2.0)));
    const std::complex<double> u1 = 0.5 * (tr + udisc);
    const std::complex<double> u2 = 0.5 * (tr - udisc);
    auto pair_of = [](const std::complex<double>& u) {
        const std::complex<double> d = std::sqrt(u * u - 4.0);
        return std::array<std::complex<double>, 2>{0.5 * (u + d), 0.5 * (u - d)};
    };
    const auto pr1 = pair_of(u1), pr2 = pair_of(u2);
    orb.monodromy_spectrum = {pr1[0], pr1[1], pr2[0], pr2[1]};
    double lam = 0.0;
    for (const auto& ev : orb.monodromy_spectrum)
        if (std::abs(ev.imag()) < 1e-8 && ev.real() > lam) lam = ev.real();
    if (!(lam > 1.0 + 1e-9))
        throw CorrectionError("orbit monodromy is not hyperbolic at x*=" +
                              std::to_string(x_star));
    orb.lambda_unstable = lam;
    orb.unstable_eigvec = eigenvector_for(m, lam);
    orb.stable_eigvec = eigenvector_for(m, 1.0 / lam);
    return orb;
}

OrbitFamily continue_family(double x_lo, double x_hi, double step, FamilySide side,
                            const ModelParams& p, const IntegratorConfig& cfg) {
    if (!(x_lo > 0.0 && x_hi >= x_lo && step > 0.0))
        throw ParameterError("continue_family expects 0 < x_lo <= x_hi and step > 0");
    const double x_l1 = std::pow(p.lambda2, -1.0 / 3.0);
    if (x_hi >= x_l1)
        throw RangeError("family range reaches the equilibrium point");

    // Bootstrap near L1 where the linear guess is reliable, then walk down.
    double x_cur = std::min(x_l1 - 0.01, x_hi);
    PeriodicOrbit prev = correct_symmetric_orbit(x_cur, linear_py_guess(x_cur, p), p, cfg);
    double prev_x = x_cur, prev_py = prev.py_star;
    double slope = 0.0;
    bool have_slope = false;

    auto advance_to = [&](double x_next) {
        const double guess = have_slope ? prev_py + slope * (x_next - prev_x)
                                        : prev_py + (linear_py_guess(x_next, p) -
                                                     linear_py_guess(prev_x, p));
        PeriodicOrbit orb = correct_symmetric_orbit(x_next, guess, p, cfg);
        slope = (orb.py_star - prev_py) / (x_next - prev_x);
        have_slope = true;
        prev_x = x_next;
        prev_py = orb.py_star;
        return orb;
    };

    // walk toward the top of the requested range
    while (prev_x > x_hi + 1e-12) {
        const double x_next = std::max(x_hi, prev_x - step);
        prev = advance_to(x_next);
    }

    OrbitFamily family;
    family.side = FamilySide::L1;
    std::vector<double> grid;
    for (double x = x_hi; x > x_lo - 0.5 * step; x -= step) grid.push_back(std::max(x, x_lo));
    if (std::abs(grid.back() - x_lo) > 1e-12) grid.push_back(x_lo);

    for (double xg : grid) {
        if (std::abs(xg - prev_x) < 1e-14) {
            family.orbits.push_back(prev);
            continue;
        }
        prev = advance_to(xg);
        family.orbits.push_back(prev);
    }
    std::reverse(family.orbits.begin(), family.orbits.end());  // ascending x*

    if (side == FamilySide::L2) {
        OrbitFamily mirrored;
        mirrored.side = FamilySide::L2;
        for (const auto& orb : family.orbits)
            mirrored.orbits.push_back(reflect_orbit_sprime(orb, p, cfg));
        return mirrored;
    }
    return family;
}

PeriodicOrbit reflect_orbit_sprime(const PeriodicOrbit& l1_orbit, const ModelParams& p,
                                   const IntegratorConfig& cfg) {
    PeriodicOrbit orb = correct_symmetric_orbit(-l1_orbit.x_star, -l1_orbit.py_star, p,
                                                cfg);
    orb.side = FamilySide::L2;
    return orb;
}

PeriodicOrbit orbit_for_energy(double h, FamilySide side, const ModelParams& p,
                               const IntegratorConfig& cfg, double h_tol) {
    // The family energy decreases toward L1 (h -> h_L1 as the orbit
    // shrinks) and increases as x* moves away from it. Solve on the L1
    // side and mirror at the end if needed.
    const double x_l1 = std::pow(p.lambda2, -1.0 / 3.0);
    const double h_l1 = -omega_eff(x_l1, 0.0, p);
    if (h <= h_l1) throw RangeError("energy at or below the equilibrium energy");

    double xa = x_l1 - 0.005;
    PeriodicOrbit oa = correct_symmetric_orbit(xa, linear_py_guess(xa, p), p, cfg);
    double prev_py = oa.py_star, prev_x = xa;
    auto corrected = [&](double x) {
        const double guess = prev_py + (x - prev_x) * -5.0;
        PeriodicOrbit o = correct_symmetric_orbit(x, guess, p, cfg);
        prev_py = o.py_star;
        prev_x = x;
        return o;
    };

    // bracket by walking outward
    double xb = xa;
    PeriodicOrbit ob = oa;
    for (int i = 0; ob.energy < h; ++i) {
        if (i >= 120 || xb < 0.25)
            throw RangeError("energy outside the reachable family range");
        xa = xb;
        oa = ob;
        xb -= 0.005;
        ob = corrected(xb);
    }

    // secant in x* on the bracketing pair
    double fa = oa.energy - h, fb = ob.energy - h;
    PeriodicOrbit best = ob;
    for (int k = 0; k < 60; ++k) {
        if (std::abs(fb) < h_tol)
            return side == FamilySide::L2 ? reflect_orbit_sprime(best, p, cfg) : best;
        const double xc = xb - fb * (xb - xa) / (fb - fa);
        PeriodicOrbit oc = corrected(xc);
        xa = xb; fa = fb;
        xb = xc; fb = oc.energy - h;
        best = oc;
    }
    throw RangeError("energy root-finding did not converge");
}

PhaseState k0_param(const PeriodicOrbit& orbit, double theta) {
    double th = std::fmod(theta, 1.0);
    if (th < 0.0) th += 1.0;
    return orbit.path.state_at(th * orbit.period);
}

Mat4 stm_at(const PeriodicOrbit& orbit, double t) {
    return stm_part(orbit.var_path.at(t));
}

namespace {

Vec4 transported(const PeriodicOrbit& orbit, double t, const Vec4& v0, double multiplier) {
    const double T = orbit.period;
    double k = std::floor(t / T);
    double tau = t - k * T;
    if (tau < 0.0) { tau += T; k -= 1.0; }
    const Mat4 m = stm_at(orbit, tau);
    Vec4 v = mat_vec(m, v0);
    const double scale = std::pow(multiplier, k);
    for (double& c : v) c *= scale;
    return v;
}

} // namespace

Vec4 transported_unstable(const PeriodicOrbit& orbit, double t) {
    return transported(orbit, t, orbit.unstable_eigvec, orbit.lambda_unstable);
}

Vec4 transported_stable(const PeriodicOrbit& orbit, double t) {
    return transported(orbit, t, orbit.stable_eigvec, 1.0 / orbit.lambda_unstable);
}

} // namespace hill4bp
