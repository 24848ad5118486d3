// Eigenvalues of lattice Hamiltonians as roots of the lattice characteristic
// function, and eigenvectors by inverse iteration.
//
// With a_j = h^2 H_jj the difference equation psi_{j+1} = (a_j - h^2 E) psi_j - psi_{j-1}
// propagates through transfer matrices T_j = [[a_j - h^2 E, -1], [1, 0]].
//   dirichlet:        E is an eigenvalue iff the solution started from
//                     (psi_1, psi_0) = (1, 0) has psi_{N+1} = 0.
//   twisted_periodic: the monodromy P = T_{N-1} ... T_0 has det P = 1 and must
//                     have eigenvalue e^{i pi/2}, i.e. tr P = 0.
// Both are polynomials of degree N in E, so their roots are the full spectrum.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssatlas/eigensolver.hpp"

namespace ssatlas {

namespace {

constexpr double kRescaleAbove = 1e150;

struct CharValue {
  cplx f;
  cplx df;
};

CharValue characteristic(const LatticeHamiltonian& H, std::span<const cplx> a, cplx z) {
  const double h2 = H.h * H.h;
  const std::size_t n = a.size();
  if (H.boundary == Boundary::dirichlet) {
    cplx p0{1.0}, p1{0.0}, d0{0.0}, d1{0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const cplx t = a[j] - h2 * z;
      const cplx np = t * p0 - p1;
      const cplx nd = t * d0 - d1 - h2 * p0;
      p1 = p0;
      d1 = d0;
      p0 = np;
      d0 = nd;
      if ((j & 15u) == 15u) {
        const double m = std::max(std::abs(p0), std::abs(p1));
        if (m > kRescaleAbove) {
          p0 /= m, p1 /= m, d0 /= m, d1 /= m;
        }
      }
    }
    return {p0, d0};
  }

  // Full 2x2 monodromy for the trace.
  cplx p00{1.0}, p01{0.0}, p10{0.0}, p11{1.0};
  cplx d00{0.0}, d01{0.0}, d10{0.0}, d11{0.0};
  for (std::size_t j = 0; j < n; ++j) {
    const cplx t = a[j] - h2 * z;
    const cplx n00 = t * p00 - p10;
    const cplx n01 = t * p01 - p11;
    const cplx e00 = t * d00 - d10 - h2 * p00;
    const cplx e01 = t * d01 - d11 - h2 * p01;
    p10 = p00;
    p11 = p01;
    d10 = d00;
    d11 = d01;
    p00 = n00;
    p01 = n01;
    d00 = e00;
    d01 = e01;
    if ((j & 15u) == 15u) {
      const double m = std::max({std::abs(p00), std::abs(p01), std::abs(p10), std::abs(p11)});
      if (m > kRescaleAbove) {
        p00 /= m, p01 /= m, p10 /= m, p11 /= m;
        d00 /= m, d01 /= m, d10 /= m, d11 /= m;
      }
    }
  }
  return {p00 + p11, d00 + d11};
}

std::vector<cplx> free_lattice_spectrum(const LatticeHamiltonian& H) {
  const std::size_t n = H.size();
  const double inv_h2 = 1.0 / (H.h * H.h);
  std::vector<cplx> z(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double phase = H.boundary == Boundary::dirichlet
                             ? std::numbers::pi * static_cast<double>(m + 1) / static_cast<double>(n + 1)
                             : (2.0 * std::numbers::pi * static_cast<double>(m) + 0.5 * std::numbers::pi) /
                                   static_cast<double>(n);
    z[m] = (2.0 - 2.0 * std::cos(phase)) * inv_h2;
  }
  return z;
}

// LU factorization with partial pivoting of a tridiagonal matrix (LAPACK gttrf layout).
struct TridiagonalLU {
  std::vector<cplx> dl, d, du, du2;
  std::vector<int> ipiv;

  TridiagonalLU(std::vector<cplx> sub, std::vector<cplx> diag, std::vector<cplx> sup)
      : dl(std::move(sub)), d(std::move(diag)), du(std::move(sup)) {
    const std::size_t n = d.size();
    du2.assign(n > 2 ? n - 2 : 0, cplx{});
    ipiv.resize(n);
    for (std::size_t i = 0; i < n; ++i) ipiv[i] = static_cast<int>(i);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] != cplx{}) {
          const cplx fact = dl[i] / d[i];
          dl[i] = fact;
          d[i + 1] -= fact * du[i];
        }
      } else {
        const cplx fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const cplx temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        ipiv[i] = static_cast<int>(i + 1);
      }
    }
    // Exact zero pivots happen when the shift hits an eigenvalue to the last bit.
    const double tiny = 1e-300;
    for (auto& v : d)
      if (std::abs(v) < tiny) v = tiny;
  }

  void solve(std::vector<cplx>& b) const {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (ipiv[i] == static_cast<int>(i)) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        const cplx temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t ii = n >= 2 ? n - 2 : 0; ii-- > 0;) {
      b[ii] = (b[ii] - du[ii] * b[ii + 1] - du2[ii] * b[ii + 2]) / d[ii];
    }
  }
};

void normalize_max(std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  if (m > 0.0)
    for (auto& c : v) c /= m;
}

}  // namespace

std::vector<cplx> lattice_eigenvalues(const LatticeHamiltonian& H, std::span<const cplx> initial_guess) {
  const std::size_t n = H.size();
  if (n == 0) return {};
  const double h2 = H.h * H.h;
  std::vector<cplx> coeff(n);
  for (std::size_t j = 0; j < n; ++j) coeff[j] = h2 * H.diagonal[j];

  std::vector<cplx> z = initial_guess.size() == n
                            ? std::vector<cplx>(initial_guess.begin(), initial_guess.end())
                            : free_lattice_spectrum(H);

  constexpr int kMaxIterations = 500;
  constexpr double kTight = 1e-13;
  constexpr double kLoose = 1e-8;

  std::vector<char> done(n, 0);
  std::vector<cplx> step(n);
  std::vector<double> last(n, INFINITY);
  std::size_t remaining = n;
  for (int it = 0; it < kMaxIterations && remaining > 0; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) {
        step[i] = 0.0;
        continue;
      }
      const auto [f, df] = characteristic(H, coeff, z[i]);
      cplx ratio = f / df;
      if (!std::isfinite(ratio.real()) || !std::isfinite(ratio.imag())) {
        ratio = cplx(1e-8 * std::max(1.0, std::abs(z[i])), 0.0);
      }
      cplx sum{};
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) sum += 1.0 / (z[i] - z[j]);
      step[i] = ratio / (1.0 - ratio * sum);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      z[i] -= step[i];
      const double size = std::abs(step[i]);
      const double scale = std::max(1.0, std::abs(z[i]));
      // Converged once the correction reaches round-off, or stops shrinking
      // after it is already well below the loose tolerance.
      if (size <= kTight * scale || (size <= 1e-3 * kLoose * scale && size >= 0.5 * last[i])) {
        done[i] = 1;
        --remaining;
      }
      last[i] = size;
    }
  }
  if (remaining > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && last[i] > kLoose * std::max(1.0, std::abs(z[i]))) {
        throw EigenFailure("Aberth iteration did not converge (" + std::to_string(remaining) +
                           " of " + std::to_string(n) + " eigenvalues unresolved)");
      }
    }
  }
  return z;
}

std::vector<cplx> lattice_eigenvector(const LatticeHamiltonian& H, cplx eigenvalue) {
  const std::size_t n = H.size();
  if (n == 0) return {};
  const cplx shift = eigenvalue + 1e-10 * std::max(1.0, std::abs(eigenvalue)) * cplx(1.0, 0.5);

  std::vector<cplx> sub(n > 1 ? n - 1 : 0, cplx(H.hopping));
  std::vector<cplx> sup(sub);
  std::vector<cplx> diag(n);
  for (std::size_t j = 0; j < n; ++j) diag[j] = H.diagonal[j] - shift;

  const bool cyclic = H.boundary == Boundary::twisted_periodic && n > 2;
  cplx gamma{}, alpha = H.corner_lower, beta = H.corner_upper;
  if (cyclic) {
    gamma = -diag[0];
    if (std::abs(gamma) < 1e-12) gamma = 1.0;
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;
  }
  const TridiagonalLU lu(std::move(sub), std::move(diag), std::move(sup));

  std::vector<cplx> u;
  cplx vz{};
  if (cyclic) {
    u.assign(n, cplx{});
    u[0] = gamma;
    u[n - 1] = alpha;
    lu.solve(u);  // u <- B^{-1} u
    vz = u[0] + beta / gamma * u[n - 1];
  }

  std::vector<cplx> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Deterministic start vector with no special symmetry.
    x[j] = cplx(1.0 + 0.3 * std::sin(0.7 * static_cast<double>(j)), 0.2 * std::cos(1.3 * static_cast<double>(j)));
  }
  for (int it = 0; it < 3; ++it) {
    lu.solve(x);
    if (cyclic) {
      const cplx vy = x[0] + beta / gamma * x[n - 1];
      const cplx factor = vy / (1.0 + vz);
      for (std::size_t j = 0; j < n; ++j) x[j] -= factor * u[j];
    }
    normalize_max(x);
  }
  double norm2 = 0.0;
  for (const auto& c : x) norm2 += std::norm(c);
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& c : x) c *= inv;
  return x;
}

double inverse_participation_ratio(std::span<const cplx> psi) {
  double s2 = 0.0, s4 = 0.0;
  for (const auto& c : psi) {
    const double p = std::norm(c);
    s2 += p;
    s4 += p * p;
  }
  return s2 > 0.0 ? s4 / (s2 * s2) : 0.0;
}

}  // namespace ssatlas
