#include "ssatlas/scattering.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ssatlas/ode.hpp"
#include "ssatlas/parallel.hpp"

namespace ssatlas {

double TransferMatrix::norm() const {
  return std::sqrt(std::norm(m11) + std::norm(m12) + std::norm(m21) + std::norm(m22));
}

double minimum_half_width(double A, double k, double tol) {
  if (A <= 0.0) return 0.0;
  const double bound = tol * std::max(1.0, k * k);
  // sech(L) < 2 e^{-L}, so L = log(2A/bound) is enough.
  return std::max(0.0, std::log(2.0 * A / bound));
}

namespace {

__extension__ typedef __float128 quad;

constexpr double kTolScale = 0.1;
// Above this norm long double round-off alone moves det M by ~1e-13 and the
// integration is repeated in quad precision.
constexpr double kQuadAboveNorm = 1e3;

template <class R>
struct Cx {
  R re{}, im{};
};

template <class R>
Cx<R> operator+(Cx<R> a, Cx<R> b) { return {a.re + b.re, a.im + b.im}; }
template <class R>
Cx<R> operator-(Cx<R> a, Cx<R> b) { return {a.re - b.re, a.im - b.im}; }
template <class R>
Cx<R> operator*(Cx<R> a, Cx<R> b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }

template <class R>
struct Kernel {
  Cx<R> m11, m12, m21, m22;
  Cx<R> det() const { return m11 * m22 - m12 * m21; }
};

// The two fundamental solutions are carried as eight real components
// (psi1, psi1', psi2, psi2'), each split into real and imaginary parts.
template <class R>
Kernel<R> integrate_kernel(const PotentialParams& p, double k, double L, double rel_tol) {
  const long double kL = static_cast<long double>(k) * L;
  const R c = static_cast<R>(std::cos(kL)), s = static_cast<R>(std::sin(kL));
  const R kr = static_cast<R>(k), k2 = kr * kr;
  const Cx<R> ep{c, -s}, em{c, s};  // e^{-ikL}, e^{ikL}
  const Cx<R> ik{R(0), kr};
  const Cx<R> d1 = ik * ep, d2 = Cx<R>{R(0), -kr} * em;
  std::array<R, 8> y{ep.re, ep.im, d1.re, d1.im, em.re, em.im, d2.re, d2.im};

  auto rhs = [&](double x, const std::array<R, 8>& u, std::array<R, 8>& du) {
    const cplx v = eval_V(x, p);
    const R wr = static_cast<R>(v.real()) - k2, wi = static_cast<R>(v.imag());
    for (int j = 0; j < 8; j += 4) {
      du[j] = u[j + 2];
      du[j + 1] = u[j + 3];
      du[j + 2] = wr * u[j] - wi * u[j + 1];
      du[j + 3] = wr * u[j + 1] + wi * u[j];
    }
  };
  ode::Options opt;
  opt.rel_tol = rel_tol * kTolScale;
  opt.abs_tol = rel_tol * kTolScale;
  opt.max_step = std::max(0.1, 0.5 / k);
  ode::integrate_dop853(rhs, -L, L, y, opt);

  // c = e^{-ikL}(psi + psi'/(ik))/2, d = e^{ikL}(psi - psi'/(ik))/2 with psi'/(ik) = -i psi'/k.
  const R half = R(1) / R(2), inv_k = R(1) / kr;
  auto amplitudes = [&](int j, Cx<R>& cc, Cx<R>& dd) {
    const Cx<R> psi{y[j], y[j + 1]};
    const Cx<R> q{y[j + 3] * inv_k, -y[j + 2] * inv_k};
    const Cx<R> plus = psi + q, minus = psi - q;
    cc = Cx<R>{half, R(0)} * ep * plus;
    dd = Cx<R>{half, R(0)} * em * minus;
  };
  Kernel<R> out;
  amplitudes(0, out.m11, out.m21);
  amplitudes(4, out.m12, out.m22);
  return out;
}

template <class R>
cplx to_cplx(Cx<R> z) {
  return {static_cast<double>(z.re), static_cast<double>(z.im)};
}

template <class R>
void store(const Kernel<R>& kern, TransferMatrix& M) {
  M.m11 = to_cplx(kern.m11);
  M.m12 = to_cplx(kern.m12);
  M.m21 = to_cplx(kern.m21);
  M.m22 = to_cplx(kern.m22);
  M.det = to_cplx(kern.det());
}

}  // namespace

TransferMatrix integrate_transfer_matrix(const PotentialParams& p, double k, double L, double rel_tol,
                                         TransferPrecision precision) {
  p.validate();
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("wave number k must be positive");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("half-width must be positive");
  if (p.A * sech(L) >= 1e-10 * std::max(1.0, k * k)) {
    throw std::invalid_argument("half-width " + std::to_string(L) + " too small for A = " + std::to_string(p.A) +
                                " (need L >= " + std::to_string(minimum_half_width(p.A, k)) + ")");
  }

  TransferMatrix M;
  M.k = k;
  M.params = p;
  if (p.A == 0.0) return M;

  store(integrate_kernel<long double>(p, k, L, rel_tol), M);
  double allowed = 100.0 * rel_tol;
  if (M.norm() > kQuadAboveNorm) {
    if (precision == TransferPrecision::adaptive) {
      store(integrate_kernel<quad>(p, k, L, rel_tol), M);
      M.quad_precision = true;
    } else {
      allowed += 64.0 * std::numeric_limits<long double>::epsilon() * M.norm() * M.norm();
    }
  }

  const double drift = std::abs(M.det - 1.0);
  if (drift > allowed) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "det M deviates from 1 by %.3g at g = %.10g, A = %.10g, k = %.10g (|M| = %.3g)",
                  drift, p.g, p.A, k, M.norm());
    throw ScatteringError(msg);
  }
  return M;
}

ScatteringCoefficients scattering_coefficients(const TransferMatrix& M) {
  if (!(M.k >= kSmallKGuard)) {
    throw std::invalid_argument("k = " + std::to_string(M.k) + " is below the small-k guard");
  }
  ScatteringCoefficients c;
  const double floor = 1e-12 * M.norm();
  double a22 = std::abs(M.m22);
  if (a22 < floor) {
    c.overflow = true;
    a22 = floor;
  }
  c.T = 1.0 / (a22 * a22);
  c.R_left = std::norm(M.m21) / (a22 * a22);
  c.R_right = std::norm(M.m12) / (a22 * a22);
  return c;
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::g ? "g" : "k"; }

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "g") return SweepAxis::g;
  if (name == "k") return SweepAxis::k;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

void ScatteringSweepSpec::validate() const {
  if (!(lo < hi)) throw std::invalid_argument("sweep range needs lo < hi");
  if (n_samples < 2) throw std::invalid_argument("sweep needs at least 2 samples");
  if (axis == SweepAxis::k && !(lo > 0.0)) throw std::invalid_argument("k range must be positive");
  if (axis == SweepAxis::g && !(fixed > 0.0)) throw std::invalid_argument("fixed k must be positive");
  PotentialParams{axis == SweepAxis::k ? fixed : lo, A, Profile::sech}.validate();
}

std::vector<double> ScatteringSweepSpec::axis_values() const {
  std::vector<double> v(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    v[static_cast<std::size_t>(i)] = i == n_samples - 1 ? hi : lo + (hi - lo) * i / (n_samples - 1);
  }
  return v;
}

std::vector<ScatteringRow> scattering_sweep(const ScatteringSweepSpec& spec, int threads) {
  spec.validate();
  const std::vector<double> axis = spec.axis_values();
  std::vector<ScatteringRow> rows(axis.size());
  parallel_for(axis.size(), threads, [&](std::size_t i) {
    const bool along_k = spec.axis == SweepAxis::k;
    const PotentialParams p{along_k ? spec.fixed : axis[i], spec.A, Profile::sech};
    const double k = along_k ? axis[i] : spec.fixed;
    ScatteringRow row;
    row.axis_value = axis[i];
    row.M = integrate_transfer_matrix(p, k, spec.half_width, spec.rel_tol);
    row.coeff = scattering_coefficients(row.M);
    rows[i] = row;
  });
  return rows;
}

}  // namespace ssatlas
