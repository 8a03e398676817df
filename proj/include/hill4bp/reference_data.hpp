#pragma once

#include <array>

namespace hill4bp::reference {

// Published reference values for the Sun-Jupiter configuration over the
// Lyapunov-family range x* in [0.615, 0.63]. Position/velocity columns are
// in (x, y, xdot, ydot) coordinates.

struct FamilyRow {
    double h;
    double x_star;
    double ydot_star;  // anchor velocity component (momentum py = ydot + x)
    double period;
};
inline constexpr std::array<FamilyRow, 4> kLyapunovFamily{{
    {-2.07715457, 0.615, 0.48123483, 3.05967299},
    {-2.08671819, 0.620, 0.45248801, 3.05678890},
    {-2.09582648, 0.625, 0.42353750, 3.05406407},
    {-2.10446079, 0.630, 0.39437305, 3.05150060},
}};

struct SxPointRow {
    double x_star;
    double x;
    double ydot;
};
// symmetric homoclinic points on S_x (y = 0, xdot = 0)
inline constexpr std::array<SxPointRow, 4> kHomZ1{{
    {0.615, -0.14646739, -3.09272039},
    {0.620, -0.13707337, -3.23629663},
    {0.625, -0.12723761, -3.40227909},
    {0.630, -0.11666113, -3.60215892},
}};
inline constexpr std::array<SxPointRow, 4> kHomZ2{{
    {0.615, -0.02675921, -8.40169252},
    {0.620, -0.03085457, -7.78778643},
    {0.625, -0.03563430, -7.20679133},
    {0.630, -0.04141244, -6.64009686},
}};

struct SyPointRow {
    double x_star;
    double y;
    double xdot;
};
// symmetric heteroclinic points on S_y (x = 0, ydot = 0); the hatted
// partners are the S-images (y, xdot negated)
inline constexpr std::array<SyPointRow, 4> kHetZ1{{
    {0.615, -0.32513154, 1.41324947},
    {0.620, -0.31736214, 1.45901631},
    {0.625, -0.30951753, 1.50672557},
    {0.630, -0.30157444, 1.55664227},
}};
inline constexpr std::array<SyPointRow, 4> kHetZ2{{
    {0.615, -0.13480207, 3.26837828},
    {0.620, -0.13957356, 3.18684274},
    {0.625, -0.14460595, 3.10468687},
    {0.630, -0.14991892, 3.02186543},
}};

struct FootpointRow {
    double x_star;
    double theta_abs;  // |theta+-|: theta+ = +value, theta- = -value
};
inline constexpr std::array<FootpointRow, 4> kHomZ1Theta{{
    {0.615, 0.27849625},
    {0.620, 0.28369125},
    {0.625, 0.29106293},
    {0.630, 0.30161988},
}};
inline constexpr std::array<FootpointRow, 4> kHomZ2Theta{{
    {0.615, 0.49677491},
    {0.620, 0.48835256},
    {0.625, 0.47799047},
    {0.630, 0.46465922},
}};
inline constexpr std::array<FootpointRow, 4> kHetZ1Theta{{
    {0.615, 0.56696772},
    {0.620, 0.55400246},
    {0.625, 0.54075381},
    {0.630, 0.52702772},
}};
inline constexpr std::array<FootpointRow, 4> kHetZ2Theta{{
    {0.615, 0.04588521},
    {0.620, 0.05160310},
    {0.625, 0.05811547},
    {0.630, 0.06560153},
}};

struct IntegralRow {
    double x_star;
    double value;  // integral over one theta-period of -dS/dtheta(sigma_0)
};
inline constexpr std::array<IntegralRow, 4> kBirkhoffHom{{
    {0.615, 4.504268037535489},
    {0.620, 4.522975396978230},
    {0.625, 4.530206829459286},
    {0.630, 4.546613141589633},
}};
inline constexpr std::array<IntegralRow, 4> kBirkhoffHet{{
    {0.615, 6.185282908819167},
    {0.620, 6.375516217294260},
    {0.625, 6.551536879012402},
    {0.630, 6.713775974499518},
}};

// energy at the collinear equilibrium
inline constexpr double kEnergyL1 = -2.16286;

// single-map verification constants
inline constexpr double kHomIntegralBound = 4.50;
inline constexpr double kHetIntegralBound = 6.18;
inline constexpr double kC1Hom = 0.0675;
inline constexpr double kC1Het = 0.0927;

// two-map verification windows and thresholds
inline constexpr double kHomWindowLo = -0.885;
inline constexpr double kHomWindowSplit = -0.4;
inline constexpr double kHomWindowHi = 0.115;
inline constexpr double kCHom = 1.8;
inline constexpr double kHetWindowLo = -0.78;
inline constexpr double kHetWindowSplit = -0.34;
inline constexpr double kHetWindowHi = 0.22;
inline constexpr double kCHet = 7.0;

} // namespace hill4bp::reference
