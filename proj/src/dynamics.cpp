#include "hill4bp/dynamics.hpp"

#include <cmath>

#include "hill4bp/errors.hpp"

namespace hill4bp {

namespace {

inline double checked_r2(double x, double y) {
    const double r2 = x * x + y * y;
    if (r2 <= 0.0) throw SingularityError("potential evaluated at r = 0");
    return r2;
}

} // namespace

double u_rot(double x, double y, const ModelParams& p) {
    const double r2 = checked_r2(x, y);
    return -p.a * x * x - p.b * y * y + 1.0 / std::sqrt(r2);
}

double omega_eff(double x, double y, const ModelParams& p) {
    const double r2 = checked_r2(x, y);
    return 0.5 * (p.lambda2 * x * x + p.lambda1 * y * y) + 1.0 / std::sqrt(r2);
}

double h1_perturbation(double x, double y, const ModelParams& p) {
    return 0.5 * (x * x + y * y) + u_rot(x, y, p);
}

void u_rot_grad(double x, double y, const ModelParams& p, double& ux, double& uy) {
    const double r2 = checked_r2(x, y);
    const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
    ux = -2.0 * p.a * x - x * inv_r3;
    uy = -2.0 * p.b * y - y * inv_r3;
}

void h1_grad(double x, double y, const ModelParams& p, double& gx, double& gy) {
    u_rot_grad(x, y, p, gx, gy);
    gx += x;
    gy += y;
}

double energy_ch4bp(const PhaseState& z, const ModelParams& p) {
    return 0.5 * (z.px * z.px + z.py * z.py) + z.y * z.px - z.x * z.py -
           u_rot(z.x, z.y, p);
}

PhaseState field_ch4bp(const PhaseState& z, const ModelParams& p) {
    double ux, uy;
    u_rot_grad(z.x, z.y, p, ux, uy);
    PhaseState d;
    d.x = z.px + z.y;
    d.y = z.py - z.x;
    d.px = z.py + ux;
    d.py = -z.px + uy;
    return d;
}

ExtendedState field_eh4bp(const ExtendedState& e, const ModelParams& p) {
    ExtendedState d;
    d.z = field_ch4bp(e.z, p);
    if (p.eps != 0.0) {
        double gx, gy;
        h1_grad(e.z.x, e.z.y, p, gx, gy);
        const double c = p.eps * std::cos(e.s);
        d.z.px -= c * gx;
        d.z.py -= c * gy;
    }
    d.s = 1.0;
    return d;
}

Mat4 jacobian_ch4bp(const PhaseState& z, const ModelParams& p) {
    const double r2 = checked_r2(z.x, z.y);
    const double r = std::sqrt(r2);
    const double inv_r3 = 1.0 / (r2 * r);
    const double inv_r5 = inv_r3 / r2;
    const double uxx = -2.0 * p.a - inv_r3 + 3.0 * z.x * z.x * inv_r5;
    const double uyy = -2.0 * p.b - inv_r3 + 3.0 * z.y * z.y * inv_r5;
    const double uxy = 3.0 * z.x * z.y * inv_r5;
    return Mat4{{{0.0, 1.0, 1.0, 0.0},
                 {-1.0, 0.0, 0.0, 1.0},
                 {uxx, uxy, 0.0, 1.0},
                 {uxy, uyy, -1.0, 0.0}}};
}

void field_ch4bp_arr(const ModelParams& p, const Vec4& y, Vec4& dy) {
    const PhaseState d = field_ch4bp({y[0], y[1], y[2], y[3]}, p);
    dy = {d.x, d.y, d.px, d.py};
}

void field_eh4bp_arr(const ModelParams& p, const Vec5& y, Vec5& dy) {
    const ExtendedState d = field_eh4bp({{y[0], y[1], y[2], y[3]}, y[4]}, p);
    dy = {d.z.x, d.z.y, d.z.px, d.z.py, d.s};
}

void field_variational_arr(const ModelParams& p, const Vec20& y, Vec20& dy) {
    const PhaseState z{y[0], y[1], y[2], y[3]};
    const PhaseState d = field_ch4bp(z, p);
    dy[0] = d.x; dy[1] = d.y; dy[2] = d.px; dy[3] = d.py;
    const Mat4 a = jacobian_ch4bp(z, p);
    // STM' = A * STM, row-major storage
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a[i][k] * y[4 + 4 * k + j];
            dy[4 + 4 * i + j] = s;
        }
    }
}

void field_action_arr(const ModelParams& p, const Vec5& y, Vec5& dy) {
    const PhaseState z{y[0], y[1], y[2], y[3]};
    const PhaseState d = field_ch4bp(z, p);
    dy[0] = d.x; dy[1] = d.y; dy[2] = d.px; dy[3] = d.py;
    dy[4] = z.px * z.xdot() + z.py * z.ydot();
}

Mat4 mat_mul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double aik = a[i][k];
            for (int j = 0; j < 4; ++j) c[i][j] += aik * b[k][j];
        }
    return c;
}

Vec4 mat_vec(const Mat4& m, const Vec4& v) {
    Vec4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i] += m[i][j] * v[j];
    return r;
}

double symplectic_defect(const Mat4& m) {
    // J in (x, y, px, py) order: J = [[0, I2], [-I2, 0]]
    auto j_of = [](int i, int j) -> double {
        if (i == 0 && j == 2) return 1.0;
        if (i == 1 && j == 3) return 1.0;
        if (i == 2 && j == 0) return -1.0;
        if (i == 3 && j == 1) return -1.0;
        return 0.0;
    };
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) s += m[k][i] * j_of(k, l) * m[l][j];
            worst = std::max(worst, std::abs(s - j_of(i, j)));
        }
    return worst;
}

} // namespace hill4bp
