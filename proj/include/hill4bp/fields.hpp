#pragma once

#include <cmath>

#include "hill4bp/dynamics.hpp"
#include "hill4bp/errors.hpp"

namespace hill4bp {

// Integrator-facing field functors. Each enforces the collision floor
// around the tertiary.

namespace detail {
inline void check_floor(double x, double y, double r_min) {
    const double r2 = x * x + y * y;
    if (r2 < r_min * r_min)
        throw CollisionError(std::sqrt(r2), 0.0);
}
} // namespace detail

struct Ch4bpField {
    ModelParams p;
    double r_min = 1e-6;
    void operator()(const Vec4& y, Vec4& dy) const {
        detail::check_floor(y[0], y[1], r_min);
        field_ch4bp_arr(p, y, dy);
    }
};

struct Eh4bpField {
    ModelParams p;
    double r_min = 1e-6;
    void operator()(const Vec5& y, Vec5& dy) const {
        detail::check_floor(y[0], y[1], r_min);
        field_eh4bp_arr(p, y, dy);
    }
};

struct VariationalField {
    ModelParams p;
    double r_min = 1e-6;
    void operator()(const Vec20& y, Vec20& dy) const {
        detail::check_floor(y[0], y[1], r_min);
        field_variational_arr(p, y, dy);
    }
};

struct ActionField {
    ModelParams p;
    double r_min = 1e-6;
    void operator()(const Vec5& y, Vec5& dy) const {
        detail::check_floor(y[0], y[1], r_min);
        field_action_arr(p, y, dy);
    }
};

} // namespace hill4bp
