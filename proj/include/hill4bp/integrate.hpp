#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hill4bp/dynamics.hpp"
#include "hill4bp/errors.hpp"
#include "hill4bp/model.hpp"

namespace hill4bp {

struct IntegratorConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double max_step = 0.5;
    double event_tol = 1e-12;     // |event| bound at a refined crossing
    double max_time = 400.0;      // horizon for crossing searches
    double r_min = 1e-6;          // collision floor
    double min_event_dt = 1e-9;   // crossings closer to the start are ignored
    double tangency_threshold = 1e-8;

    void validate() const {
        if (!(abs_tol > 0.0 && rel_tol > 0.0 && max_step > 0.0 && event_tol > 0.0))
            throw ParameterError("integrator tolerances must be positive");
        if (event_tol > abs_tol * 1e3)
            throw ParameterError("event_tol must not exceed abs_tol * 1e3");
    }
};

template <std::size_t N>
using VecN = std::array<double, N>;

/// One accepted step's interpolation record (order-7 continuous extension).
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;  // signed
    std::array<VecN<N>, 8> c{};

    VecN<N> eval(double t) const {
        const double s = (t - t0) / h;
        const double s1 = 1.0 - s;
        VecN<N> y;
        for (std::size_t i = 0; i < N; ++i) {
            const double v =
                c[0][i] +
                s * (c[1][i] +
                     s1 * (c[2][i] +
                           s * (c[3][i] +
                                s1 * (c[4][i] +
                                      s * (c[5][i] + s1 * (c[6][i] + s * c[7][i]))))));
            y[i] = v;
        }
        return y;
    }
};

namespace dop853 {

// Nodes, stage matrix, weights, error and interpolation coefficients of the
// Dormand-Prince 8(5,3) pair with 7th-order continuous output (Hairer,
// Norsett, Wanner, "Solving ODEs I", dop853.f).
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;
inline constexpr double c14 = 0.1e+00;
inline constexpr double c15 = 0.2e+00;
inline constexpr double c16 = 0.777777777777777777777777777778e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double a141 = 5.61675022830479523392909219681e-2;
inline constexpr double a147 = 2.53500210216624811088794765333e-1;
inline constexpr double a148 = -2.46239037470802489917441475441e-1;
inline constexpr double a149 = -1.24191423263816360469010140626e-1;
inline constexpr double a1410 = 1.5329179827876569731206322685e-1;
inline constexpr double a1411 = 8.20105229563468988491666602057e-3;
inline constexpr double a1412 = 7.56789766054569976138603589584e-3;
inline constexpr double a1413 = -8.298e-3;
inline constexpr double a151 = 3.18346481635021405060768473261e-2;
inline constexpr double a156 = 2.83009096723667755288322961402e-2;
inline constexpr double a157 = 5.35419883074385676223797384372e-2;
inline constexpr double a158 = -5.49237485713909884646569340306e-2;
inline constexpr double a1511 = -1.08347328697249322858509316994e-4;
inline constexpr double a1512 = 3.82571090835658412954920192323e-4;
inline constexpr double a1513 = -3.40465008687404560802977114492e-4;
inline constexpr double a1514 = 1.41312443674632500278074618366e-1;
inline constexpr double a161 = -4.28896301583791923408573538692e-1;
inline constexpr double a166 = -4.69762141536116384314449447206e0;
inline constexpr double a167 = 7.68342119606259904184240953878e0;
inline constexpr double a168 = 4.06898981839711007970213554331e0;
inline constexpr double a169 = 3.56727187455281109270669543021e-1;
inline constexpr double a1613 = -1.39902416515901462129418009734e-3;
inline constexpr double a1614 = 2.9475147891527723389556272149e0;
inline constexpr double a1615 = -9.15095847217987001081870187138e0;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double e31 = 0.244094488188976377952755905512e+00;
inline constexpr double e32 = 0.733846688281611857341361741547e+00;
inline constexpr double e33 = 0.220588235294117647058823529412e-01;

inline constexpr double e51 = 0.1312004499419488073250102996e-01;
inline constexpr double e56 = -0.1225156446376204440720569753e+01;
inline constexpr double e57 = -0.4957589496572501915214079952e+00;
inline constexpr double e58 = 0.1664377182454986536961530415e+01;
inline constexpr double e59 = -0.3503288487499736816886487290e+00;
inline constexpr double e510 = 0.3341791187130174790297318841e+00;
inline constexpr double e511 = 0.8192320648511571246570742613e-01;
inline constexpr double e512 = -0.2235530786388629525884427845e-01;

inline constexpr double d41 = -0.84289382761090128651353491142e+01;
inline constexpr double d46 = 0.56671495351937776962531783590e+00;
inline constexpr double d47 = -0.30689499459498916912797304727e+01;
inline constexpr double d48 = 0.23846676565120698287728149680e+01;
inline constexpr double d49 = 0.21170345824450282767155149946e+01;
inline constexpr double d410 = -0.87139158377797299206789907490e+00;
inline constexpr double d411 = 0.22404374302607882758541771650e+01;
inline constexpr double d412 = 0.63157877876946881815570249290e+00;
inline constexpr double d413 = -0.88990336451333310820698117400e-01;
inline constexpr double d414 = 0.18148505520854727256656404962e+02;
inline constexpr double d415 = -0.91946323924783554000451984436e+01;
inline constexpr double d416 = -0.44360363875948939664310572000e+01;
inline constexpr double d51 = 0.10427508642579134603413151009e+02;
inline constexpr double d56 = 0.24228349177525818288430175319e+03;
inline constexpr double d57 = 0.16520045171727028198505394887e+03;
inline constexpr double d58 = -0.37454675472269020279518312152e+03;
inline constexpr double d59 = -0.22113666853125306036270938578e+02;
inline constexpr double d510 = 0.77334326684722638389603898808e+01;
inline constexpr double d511 = -0.30674084731089398182061213626e+02;
inline constexpr double d512 = -0.93321305264302278729567221706e+01;
inline constexpr double d513 = 0.15697238121770843886131091075e+02;
inline constexpr double d514 = -0.31139403219565177677282850411e+02;
inline constexpr double d515 = -0.93529243588444783865713862664e+01;
inline constexpr double d516 = 0.35816841486394083752465898540e+02;
inline constexpr double d61 = 0.19985053242002433820987653617e+02;
inline constexpr double d66 = -0.38703730874935176555105901742e+03;
inline constexpr double d67 = -0.18917813819516756882830838328e+03;
inline constexpr double d68 = 0.52780815920542364900561016686e+03;
inline constexpr double d69 = -0.11573902539959630126141871134e+02;
inline constexpr double d610 = 0.68812326946963000169666922661e+01;
inline constexpr double d611 = -0.10006050966910838403183860980e+01;
inline constexpr double d612 = 0.77771377980534432092869265740e+00;
inline constexpr double d613 = -0.27782057523535084065932004339e+01;
inline constexpr double d614 = -0.60196695231264120758267380846e+02;
inline constexpr double d615 = 0.84320405506677161018159903784e+02;
inline constexpr double d616 = 0.11992291136182789328035130030e+02;
inline constexpr double d71 = -0.25693933462703749003312586129e+02;
inline constexpr double d76 = -0.15418974869023643374053993627e+03;
inline constexpr double d77 = -0.23152937917604549567536039109e+03;
inline constexpr double d78 = 0.35763911791061412378285349910e+03;
inline constexpr double d79 = 0.93405324183624310003907691704e+02;
inline constexpr double d710 = -0.37458323136451633156875139351e+02;
inline constexpr double d711 = 0.10409964950896230045147246184e+03;
inline constexpr double d712 = 0.29840293426660503123344363579e+02;
inline constexpr double d713 = -0.43533456590011143754432175058e+02;
inline constexpr double d714 = 0.96324553959188282948394950600e+02;
inline constexpr double d715 = -0.39177261675615439165231486172e+02;
inline constexpr double d716 = -0.14972683625798562581422125276e+03;

} // namespace dop853

/// Adaptive DOP853 stepper over a fixed right-hand side. F is callable as
/// f(const VecN<N>& y, VecN<N>& dy); time-dependence, if any, is carried in
/// the state itself (the extended field does this with its phase component).
template <std::size_t N, class F>
class Dop853Stepper {
  public:
    Dop853Stepper(F f, const IntegratorConfig& cfg, double t0, const VecN<N>& y0,
                  double direction)
        : f_(std::move(f)), cfg_(cfg), t_(t0), t0_(t0), y_(y0),
          dir_(direction >= 0.0 ? 1.0 : -1.0) {
        cfg_.validate();
        f_(y_, k1_);
        h_ = initial_step();
    }

    double t() const { return t_; }
    const VecN<N>& y() const { return y_; }

    /// Advances one accepted step, clamped so it does not pass t_limit.
    /// Returns false when t_limit was already reached.
    bool advance(double t_limit, DenseStep<N>& rec) {
        const double remaining = dir_ * (t_limit - t_);
        if (remaining <= 0.0) return false;
        double h = std::min({h_, remaining, cfg_.max_step});
        const double eps = std::numeric_limits<double>::epsilon();
        for (int attempt = 0; attempt < 1000; ++attempt) {
            if (h < 4.0 * eps * std::max({std::abs(t_), std::abs(t0_), 1.0}) && h < remaining)
                throw StiffnessError("step size underflow at t=" + std::to_string(t_));
            const double hs = dir_ * h;
            if (try_step(hs, rec)) {
                t_ += hs;
                y_ = ynew_;
                k1_ = know_;
                h_ = std::min(hnext_, cfg_.max_step);
                return true;
            }
            h = hnext_;
        }
        throw StiffnessError("too many step rejections at t=" + std::to_string(t_));
    }

  private:
    double error_weight(double yi, double yni) const {
        return cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(yi), std::abs(yni));
    }

    double initial_step() const {
        // conservative first guess; the controller adapts immediately
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sci = error_weight(y_[i], y_[i]);
            err += (k1_[i] / sci) * (k1_[i] / sci);
        }
        double h = std::pow(err / N, -0.0625);
        return std::min({h, cfg_.max_step, 1e-2});
    }

    // One trial step of signed width hs. On acceptance fills rec, ynew_,
    // know_ and the next step size; on rejection only hnext_.
    bool try_step(double hs, DenseStep<N>& rec) {
        using namespace dop853;
        const double h = std::abs(hs);
        VecN<N> yw;

        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a21 * k1_[i]);
        f_(yw, k2_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a31 * k1_[i] + a32 * k2_[i]);
        f_(yw, k3_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a41 * k1_[i] + a43 * k3_[i]);
        f_(yw, k4_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a51 * k1_[i] + a53 * k3_[i] + a54 * k4_[i]);
        f_(yw, k5_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a61 * k1_[i] + a64 * k4_[i] + a65 * k5_[i]);
        f_(yw, k6_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a71 * k1_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        f_(yw, k7_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a81 * k1_[i] + a84 * k4_[i] + a85 * k5_[i] +
                                  a86 * k6_[i] + a87 * k7_[i]);
        f_(yw, k8_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a91 * k1_[i] + a94 * k4_[i] + a95 * k5_[i] +
                                  a96 * k6_[i] + a97 * k7_[i] + a98 * k8_[i]);
        f_(yw, k9_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a101 * k1_[i] + a104 * k4_[i] + a105 * k5_[i] +
                                  a106 * k6_[i] + a107 * k7_[i] + a108 * k8_[i] +
                                  a109 * k9_[i]);
        f_(yw, k10_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a111 * k1_[i] + a114 * k4_[i] + a115 * k5_[i] +
                                  a116 * k6_[i] + a117 * k7_[i] + a118 * k8_[i] +
                                  a119 * k9_[i] + a1110 * k10_[i]);
        f_(yw, k11_);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a121 * k1_[i] + a124 * k4_[i] + a125 * k5_[i] +
                                  a126 * k6_[i] + a127 * k7_[i] + a128 * k8_[i] +
                                  a129 * k9_[i] + a1210 * k10_[i] + a1211 * k11_[i]);
        f_(yw, k12_);

        VecN<N> ksum;
        for (std::size_t i = 0; i < N; ++i) {
            ksum[i] = b1 * k1_[i] + b6 * k6_[i] + b7 * k7_[i] + b8 * k8_[i] +
                      b9 * k9_[i] + b10 * k10_[i] + b11 * k11_[i] + b12 * k12_[i];
            ynew_[i] = y_[i] + hs * ksum[i];
        }

        double err3 = 0.0, err5 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sci = error_weight(y_[i], ynew_[i]);
            const double e3 = ksum[i] - e31 * k1_[i] - e32 * k9_[i] - e33 * k12_[i];
            const double e5 = e51 * k1_[i] + e56 * k6_[i] + e57 * k7_[i] + e58 * k8_[i] +
                              e59 * k9_[i] + e510 * k10_[i] + e511 * k11_[i] +
                              e512 * k12_[i];
            err3 += (e3 / sci) * (e3 / sci);
            err5 += (e5 / sci) * (e5 / sci);
        }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        const double err = h * err5 * std::sqrt(1.0 / (N * deno));

        const double safe = 0.9, min_scale = 0.333, max_scale = 6.0, alpha = 0.125;
        if (err <= 1.0) {
            double scale = (err == 0.0) ? max_scale
                                        : std::clamp(safe * std::pow(err, -alpha),
                                                     min_scale, max_scale);
            hnext_ = h * scale;
            f_(ynew_, know_);
            fill_dense(hs, rec);
            return true;
        }
        hnext_ = h * std::max(safe * std::pow(err, -alpha), min_scale);
        return false;
    }

    void fill_dense(double hs, DenseStep<N>& rec) {
        using namespace dop853;
        rec.t0 = t_;
        rec.h = hs;
        auto& c = rec.c;
        for (std::size_t i = 0; i < N; ++i) {
            c[0][i] = y_[i];
            c[1][i] = ynew_[i] - y_[i];
            c[2][i] = hs * k1_[i] - c[1][i];
            c[3][i] = c[1][i] - hs * know_[i] - c[2][i];
            c[4][i] = d41 * k1_[i] + d46 * k6_[i] + d47 * k7_[i] + d48 * k8_[i] +
                      d49 * k9_[i] + d410 * k10_[i] + d411 * k11_[i] + d412 * k12_[i];
            c[5][i] = d51 * k1_[i] + d56 * k6_[i] + d57 * k7_[i] + d58 * k8_[i] +
                      d59 * k9_[i] + d510 * k10_[i] + d511 * k11_[i] + d512 * k12_[i];
            c[6][i] = d61 * k1_[i] + d66 * k6_[i] + d67 * k7_[i] + d68 * k8_[i] +
                      d69 * k9_[i] + d610 * k10_[i] + d611 * k11_[i] + d612 * k12_[i];
            c[7][i] = d71 * k1_[i] + d76 * k6_[i] + d77 * k7_[i] + d78 * k8_[i] +
                      d79 * k9_[i] + d710 * k10_[i] + d711 * k11_[i] + d712 * k12_[i];
        }
        // three extra stages of the 7th-order interpolant
        VecN<N> yw, ka, kb, kc;
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a141 * k1_[i] + a147 * k7_[i] + a148 * k8_[i] +
                                  a149 * k9_[i] + a1410 * k10_[i] + a1411 * k11_[i] +
                                  a1412 * k12_[i] + a1413 * know_[i]);
        f_(yw, ka);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a151 * k1_[i] + a156 * k6_[i] + a157 * k7_[i] +
                                  a158 * k8_[i] + a1511 * k11_[i] + a1512 * k12_[i] +
                                  a1513 * know_[i] + a1514 * ka[i]);
        f_(yw, kb);
        for (std::size_t i = 0; i < N; ++i)
            yw[i] = y_[i] + hs * (a161 * k1_[i] + a166 * k6_[i] + a167 * k7_[i] +
                                  a168 * k8_[i] + a169 * k9_[i] + a1613 * know_[i] +
                                  a1614 * ka[i] + a1615 * kb[i]);
        f_(yw, kc);
        for (std::size_t i = 0; i < N; ++i) {
            c[4][i] = hs * (c[4][i] + d413 * know_[i] + d414 * ka[i] + d415 * kb[i] +
                            d416 * kc[i]);
            c[5][i] = hs * (c[5][i] + d513 * know_[i] + d514 * ka[i] + d515 * kb[i] +
                            d516 * kc[i]);
            c[6][i] = hs * (c[6][i] + d613 * know_[i] + d614 * ka[i] + d615 * kb[i] +
                            d616 * kc[i]);
            c[7][i] = hs * (c[7][i] + d713 * know_[i] + d714 * ka[i] + d715 * kb[i] +
                            d716 * kc[i]);
        }
    }

    F f_;
    IntegratorConfig cfg_;
    double t_, t0_;
    VecN<N> y_, ynew_, know_;
    VecN<N> k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_, k11_, k12_;
    double dir_;
    double h_ = 0.0;       // magnitude of the next step
    double hnext_ = 0.0;
};

/// Dense trajectory: accepted-step nodes plus the continuous extension of
/// every step. Immutable after construction.
template <std::size_t N>
class Trajectory {
  public:
    Trajectory() = default;
    Trajectory(std::vector<double> times, std::vector<VecN<N>> states,
               std::vector<DenseStep<N>> steps)
        : times_(std::move(times)), states_(std::move(states)), steps_(std::move(steps)) {}

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    bool forward() const { return times_.back() >= times_.front(); }
    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    const VecN<N>& node(std::size_t i) const { return states_[i]; }

    VecN<N> at(double t) const {
        if (steps_.empty()) {
            if (std::abs(t - times_.front()) > 1e-9)
                throw std::out_of_range("dense evaluation outside trajectory span");
            return states_.front();
        }
        const bool fwd = forward();
        const double lo = fwd ? t_begin() : t_end();
        const double hi = fwd ? t_end() : t_begin();
        const double slack = 1e-9 * (1.0 + std::abs(hi - lo));
        if (t < lo - slack || t > hi + slack)
            throw std::out_of_range("dense evaluation outside trajectory span");
        // locate the step whose interval contains t
        std::size_t idx;
        if (fwd) {
            auto it = std::upper_bound(times_.begin(), times_.end(), t);
            idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                0, std::distance(times_.begin(), it) - 1));
        } else {
            auto it = std::upper_bound(times_.begin(), times_.end(), t,
                                       [](double a, double b) { return a > b; });
            idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                0, std::distance(times_.begin(), it) - 1));
        }
        idx = std::min(idx, steps_.size() - 1);
        return steps_[idx].eval(t);
    }

    PhaseState state_at(double t) const
        requires(N >= 4)
    {
        const VecN<N> v = at(t);
        return {v[0], v[1], v[2], v[3]};
    }

    const std::vector<DenseStep<N>>& steps() const { return steps_; }

  private:
    std::vector<double> times_;
    std::vector<VecN<N>> states_;
    std::vector<DenseStep<N>> steps_;
};

template <std::size_t N, class F>
Trajectory<N> propagate(F f, const VecN<N>& y0, double t0, double t1,
                        const IntegratorConfig& cfg) {
    std::vector<double> times{t0};
    std::vector<VecN<N>> states{y0};
    std::vector<DenseStep<N>> steps;
    if (t1 == t0) return Trajectory<N>(std::move(times), std::move(states), std::move(steps));
    Dop853Stepper<N, F> stepper(std::move(f), cfg, t0, y0, t1 - t0);
    DenseStep<N> rec;
    while (stepper.advance(t1, rec)) {
        steps.push_back(rec);
        times.push_back(stepper.t());
        states.push_back(stepper.y());
    }
    return Trajectory<N>(std::move(times), std::move(states), std::move(steps));
}

/// Poincare section: zero set of a scalar event function with an optional
/// crossing direction and an optional guard predicate.
struct SectionSpec {
    enum class Direction { increasing, decreasing, either };

    std::function<double(const PhaseState&)> event;
    Direction direction = Direction::either;
    std::function<bool(const PhaseState&)> guard;  // may be empty
    std::string name;

    static SectionSpec y_zero(Direction dir = Direction::either) {
        return {[](const PhaseState& z) { return z.y; }, dir, nullptr, "y=0"};
    }
    /// S_x = {y = 0, py < 0}
    static SectionSpec sx() {
        return {[](const PhaseState& z) { return z.y; }, Direction::either,
                [](const PhaseState& z) { return z.py < 0.0; }, "Sx"};
    }
    /// S_y = {x = 0, px > 0}
    static SectionSpec sy() {
        return {[](const PhaseState& z) { return z.x; }, Direction::either,
                [](const PhaseState& z) { return z.px > 0.0; }, "Sy"};
    }
};

struct Crossing {
    double t = 0.0;
    PhaseState state;
    bool tangential = false;
};

namespace detail {

template <std::size_t N>
inline PhaseState head4(const VecN<N>& v) {
    static_assert(N >= 4);
    return {v[0], v[1], v[2], v[3]};
}

// Brent root refinement of g over a sign-change bracket of the dense record.
template <std::size_t N>
double refine_root(const DenseStep<N>& rec,
                   const std::function<double(const PhaseState&)>& g, double ta,
                   double tb, double ga, double gb) {
    double a = ta, b = tb, fa = ga, fb = gb;
    double c = a, fc = fa, d = b - a, e = d;
    const double tol_abs = 1e-15;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + tol_abs;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = m; e = m;
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, rr = fb / fc;
                p = s * (2.0 * m * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = g(head4(rec.eval(b)));
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa; d = b - a; e = d;
        }
    }
    return b;
}

} // namespace detail

/// Scans one accepted step for section crossings, in time order. Crossings
/// failing the direction or guard filters are discarded.
template <std::size_t N>
void collect_crossings(const DenseStep<N>& rec, const SectionSpec& section,
                       const IntegratorConfig& cfg, double t_start,
                       std::vector<Crossing>& out) {
    constexpr int kSamples = 8;
    std::array<double, kSamples + 1> ts, gs;
    for (int i = 0; i <= kSamples; ++i) {
        ts[i] = rec.t0 + rec.h * (static_cast<double>(i) / kSamples);
        gs[i] = section.event(detail::head4(rec.eval(ts[i])));
    }
    for (int i = 0; i < kSamples; ++i) {
        const bool sign_change = (gs[i] < 0.0 && gs[i + 1] >= 0.0) ||
                                 (gs[i] > 0.0 && gs[i + 1] <= 0.0);
        if (!sign_change) continue;
        const double tr = detail::refine_root(rec, section.event, ts[i], ts[i + 1],
                                              gs[i], gs[i + 1]);
        if (std::abs(tr - t_start) < cfg.min_event_dt) continue;
        const PhaseState zr = detail::head4(rec.eval(tr));
        const bool increasing = gs[i] < gs[i + 1];
        if (section.direction == SectionSpec::Direction::increasing && !increasing) continue;
        if (section.direction == SectionSpec::Direction::decreasing && increasing) continue;
        if (section.guard && !section.guard(zr)) continue;
        // slope estimate for the tangency flag
        const double dt = 1e-6 * std::abs(rec.h);
        const double gm = section.event(detail::head4(rec.eval(tr - dt)));
        const double gp = section.event(detail::head4(rec.eval(tr + dt)));
        Crossing c;
        c.t = tr;
        c.state = zr;
        c.tangential = std::abs((gp - gm) / (2.0 * dt)) < cfg.tangency_threshold;
        out.push_back(c);
    }
}

template <std::size_t N>
struct CrossingFull {
    double t = 0.0;
    VecN<N> y{};
    bool tangential = false;
};

/// Integrates from start until the n_crossings-th guarded crossing of the
/// section; throws NoCrossingError if it does not occur within cfg.max_time.
/// Set backward=true to search in negative time.
template <std::size_t N, class F>
CrossingFull<N> flow_to_section_full(F f, const VecN<N>& y0, double t0,
                                     const SectionSpec& section, int n_crossings,
                                     const IntegratorConfig& cfg, bool backward = false) {
    if (n_crossings < 1) throw ParameterError("n_crossings must be >= 1");
    const double dir = backward ? -1.0 : 1.0;
    const double t_limit = t0 + dir * cfg.max_time;
    Dop853Stepper<N, F> stepper(std::move(f), cfg, t0, y0, dir);
    DenseStep<N> rec;
    int found = 0;
    std::vector<Crossing> hits;
    while (stepper.advance(t_limit, rec)) {
        hits.clear();
        collect_crossings(rec, section, cfg, t0, hits);
        for (const auto& c : hits) {
            if (++found == n_crossings)
                return CrossingFull<N>{c.t, rec.eval(c.t), c.tangential};
        }
    }
    throw NoCrossingError("no section crossing " + std::to_string(n_crossings) + " of " +
                          (section.name.empty() ? "section" : section.name) +
                          " within max_time");
}

template <std::size_t N, class F>
Crossing flow_to_section(F f, const VecN<N>& y0, double t0, const SectionSpec& section,
                         int n_crossings, const IntegratorConfig& cfg,
                         bool backward = false) {
    const CrossingFull<N> c =
        flow_to_section_full<N, F>(std::move(f), y0, t0, section, n_crossings, cfg, backward);
    return Crossing{c.t, detail::head4(c.y), c.tangential};
}

} // namespace hill4bp
