#pragma once

#include <array>

#include "hill4bp/model.hpp"

namespace hill4bp {

using Vec4 = std::array<double, 4>;
using Vec5 = std::array<double, 5>;
using Vec20 = std::array<double, 20>;
using Mat4 = std::array<std::array<double, 4>, 4>;

// Potentials. r = sqrt(x^2+y^2) must be positive; a SingularityError is
// thrown at r = 0.
double u_rot(double x, double y, const ModelParams& p);
double omega_eff(double x, double y, const ModelParams& p);

/// First-order perturbation H1 = (x^2+y^2)/2 + U_rot = Omega_eff.
double h1_perturbation(double x, double y, const ModelParams& p);

void u_rot_grad(double x, double y, const ModelParams& p, double& ux, double& uy);
void h1_grad(double x, double y, const ModelParams& p, double& gx, double& gy);

/// H0 = (px^2+py^2)/2 + y px - x py - U_rot(x,y).
double energy_ch4bp(const PhaseState& z, const ModelParams& p);

/// Canonical vector field of H0 (returned as the time derivative of the
/// state components).
PhaseState field_ch4bp(const PhaseState& z, const ModelParams& p);

/// Extended field of H0 + eps cos(s) H1 with sdot = 1 (first-order elliptic
/// model; the O(eps^2) remainder is not modeled).
ExtendedState field_eh4bp(const ExtendedState& e, const ModelParams& p);

/// Analytic Jacobian of field_ch4bp, state order (x, y, px, py).
Mat4 jacobian_ch4bp(const PhaseState& z, const ModelParams& p);

// Array-style fields for the integrator. Layouts:
//   Vec4  : x, y, px, py
//   Vec5  : x, y, px, py, s                     (extended) or quadrature slot
//   Vec20 : x, y, px, py, then the 4x4 STM in row-major order
void field_ch4bp_arr(const ModelParams& p, const Vec4& y, Vec4& dy);
void field_eh4bp_arr(const ModelParams& p, const Vec5& y, Vec5& dy);
void field_variational_arr(const ModelParams& p, const Vec20& y, Vec20& dy);
/// x, y, px, py plus running action integral of (px xdot + py ydot).
void field_action_arr(const ModelParams& p, const Vec5& y, Vec5& dy);

inline Vec20 variational_initial(const PhaseState& z) {
    Vec20 v{};
    v[0] = z.x; v[1] = z.y; v[2] = z.px; v[3] = z.py;
    for (int i = 0; i < 4; ++i) v[4 + 5 * i] = 1.0;
    return v;
}

inline PhaseState state_part(const Vec20& v) { return {v[0], v[1], v[2], v[3]}; }
inline Mat4 stm_part(const Vec20& v) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = v[4 + 4 * i + j];
    return m;
}

Mat4 mat_mul(const Mat4& a, const Mat4& b);
Vec4 mat_vec(const Mat4& m, const Vec4& v);
/// max-norm of M^T J M - J (symplectic defect).
double symplectic_defect(const Mat4& m);

} // namespace hill4bp
