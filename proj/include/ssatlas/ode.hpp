#pragma once

// Dormand-Prince 8(5,3) explicit Runge-Kutta integrator with adaptive step
// control (Hairer, Norsett & Wanner, "Solving ODEs I", routine DOP853),
// specialised to fixed-size state vectors of real or complex scalars.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssatlas::ode {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double initial_step = 0.0;  // 0 picks a step from the tolerances
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 1'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

namespace dop853 {

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

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

// third-order embedded estimate
inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

// fifth-order embedded estimate
inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

}  // namespace dop853

namespace detail {

// Real scalars of any precision (double, long double, __float128) and complex
// numbers over them. Step control only needs magnitudes in double.
template <class S>
struct ScalarTraits {
  using real = S;
  static double abs(const S& v) {
    const double d = static_cast<double>(v);
    return d < 0.0 ? -d : d;
  }
};

template <class T>
struct ScalarTraits<std::complex<T>> {
  using real = T;
  static double abs(const std::complex<T>& v) {
    return std::hypot(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  }
};

}  // namespace detail

// Integrates y' = f(x, y) from x0 to x1 (either direction), overwriting y with
// the solution at x1. `f` has signature void(double x, const State& y, State& dy).
template <class S, std::size_t N, class Rhs>
Stats integrate_dop853(Rhs&& f, double x0, double x1, std::array<S, N>& y, const Options& opt = {}) {
  using R = typename detail::ScalarTraits<S>::real;
  using State = std::array<S, N>;
  const auto mag = [](const S& v) { return detail::ScalarTraits<S>::abs(v); };
  using namespace dop853;

  Stats stats;
  if (x0 == x1) return stats;
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol >= 0.0)) {
    throw std::invalid_argument("integrator tolerances must be positive");
  }

  const double dir = x1 > x0 ? 1.0 : -1.0;
  const double span = std::abs(x1 - x0);
  const double hmax = opt.max_step > 0.0 ? opt.max_step : span;
  constexpr double uround = 2.3e-16;
  constexpr double safe = 0.9;
  constexpr double fac1 = 0.333;  // smallest step ratio
  constexpr double fac2 = 6.0;    // largest step ratio
  constexpr double expo = 1.0 / 8.0;

  auto scale = [&](std::size_t i, const State& a, const State& b) {
    return opt.abs_tol + opt.rel_tol * std::max(mag(a[i]), mag(b[i]));
  };

  State k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, yt, ynew;
  double x = x0;
  f(x, y, k1);
  ++stats.rhs_evaluations;

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    // Hairer's initial-step heuristic, first-order variant.
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opt.abs_tol + opt.rel_tol * mag(y[i]);
      dnf += mag(k1[i]) * mag(k1[i]) / (sk * sk);
      dny += mag(y[i]) * mag(y[i]) / (sk * sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, hmax);
  }
  h = std::min(h, span);

  bool last_rejected = false;
  while (dir * (x1 - x) > 0.0) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      throw IntegrationError("DOP853: step budget exhausted at x = " + std::to_string(x));
    }
    if (h < 10.0 * uround * std::max(1.0, std::abs(x))) {
      throw IntegrationError("DOP853: step size underflow at x = " + std::to_string(x));
    }
    bool final_step = false;
    if (h >= std::abs(x1 - x)) {
      h = std::abs(x1 - x);
      final_step = true;
    }
    const double hd = dir * h;
    const R hs = hd;

    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * R(a21) * k1[i];
    f(x + c2 * hd, yt, k2);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (R(a31) * k1[i] + R(a32) * k2[i]);
    f(x + c3 * hd, yt, k3);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (R(a41) * k1[i] + R(a43) * k3[i]);
    f(x + c4 * hd, yt, k4);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (R(a51) * k1[i] + R(a53) * k3[i] + R(a54) * k4[i]);
    f(x + c5 * hd, yt, k5);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (R(a61) * k1[i] + R(a64) * k4[i] + R(a65) * k5[i]);
    f(x + c6 * hd, yt, k6);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (R(a71) * k1[i] + R(a74) * k4[i] + R(a75) * k5[i] + R(a76) * k6[i]);
    f(x + c7 * hd, yt, k7);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (R(a81) * k1[i] + R(a84) * k4[i] + R(a85) * k5[i] + R(a86) * k6[i] + R(a87) * k7[i]);
    f(x + c8 * hd, yt, k8);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (R(a91) * k1[i] + R(a94) * k4[i] + R(a95) * k5[i] + R(a96) * k6[i] + R(a97) * k7[i] +
                           R(a98) * k8[i]);
    f(x + c9 * hd, yt, k9);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (R(a101) * k1[i] + R(a104) * k4[i] + R(a105) * k5[i] + R(a106) * k6[i] + R(a107) * k7[i] +
                           R(a108) * k8[i] + R(a109) * k9[i]);
    f(x + c10 * hd, yt, k10);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (R(a111) * k1[i] + R(a114) * k4[i] + R(a115) * k5[i] + R(a116) * k6[i] + R(a117) * k7[i] +
                           R(a118) * k8[i] + R(a119) * k9[i] + R(a1110) * k10[i]);
    f(x + c11 * hd, yt, k2);  // stage 11 reuses k2
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (R(a121) * k1[i] + R(a124) * k4[i] + R(a125) * k5[i] + R(a126) * k6[i] + R(a127) * k7[i] +
                           R(a128) * k8[i] + R(a129) * k9[i] + R(a1210) * k10[i] + R(a1211) * k2[i]);
    f(x + hd, yt, k3);  // stage 12 reuses k3
    stats.rhs_evaluations += 11;

    double err5 = 0.0, err3 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      k4[i] = R(b1) * k1[i] + R(b6) * k6[i] + R(b7) * k7[i] + R(b8) * k8[i] + R(b9) * k9[i] + R(b10) * k10[i] +
              R(b11) * k2[i] + R(b12) * k3[i];
      ynew[i] = y[i] + hs * k4[i];
    }
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = scale(i, y, ynew);
      const auto e3 = k4[i] - R(bhh1) * k1[i] - R(bhh2) * k9[i] - R(bhh3) * k3[i];
      const auto e5 = R(er1) * k1[i] + R(er6) * k6[i] + R(er7) * k7[i] + R(er8) * k8[i] + R(er9) * k9[i] +
                      R(er10) * k10[i] + R(er11) * k2[i] + R(er12) * k3[i];
      err3 += mag(e3) * mag(e3) / (sk * sk);
      err5 += mag(e5) * mag(e5) / (sk * sk);
    }
    double deno = err5 + 0.01 * err3;
    if (deno <= 0.0) deno = 1.0;
    const double err = h * err5 * std::sqrt(1.0 / (static_cast<double>(N) * deno));

    double fac = std::pow(std::max(err, 1e-300), expo) / safe;
    fac = std::clamp(fac, 1.0 / fac2, 1.0 / fac1);
    double hnew = h / fac;

    if (err <= 1.0) {
      ++stats.accepted;
      x = final_step ? x1 : x + hd;
      y = ynew;
      f(x, y, k1);
      ++stats.rhs_evaluations;
      hnew = std::min(hnew, hmax);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      if (final_step) break;
    } else {
      ++stats.rejected;
      hnew = h / std::min(1.0 / fac1, std::pow(err, expo) / safe);
      last_rejected = true;
    }
    h = hnew;
  }
  return stats;
}

}  // namespace ssatlas::ode
