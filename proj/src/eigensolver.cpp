#include "ssatlas/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssatlas/parallel.hpp"

namespace ssatlas {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::twisted_periodic:
      return "twisted-periodic";
    case Boundary::dirichlet:
      return "dirichlet";
  }
  return "unknown";
}

Boundary boundary_from_string(const std::string& name) {
  if (name == "twisted-periodic") return Boundary::twisted_periodic;
  if (name == "dirichlet") return Boundary::dirichlet;
  throw std::invalid_argument("unknown boundary '" + name + "'");
}

std::string to_string(TransitionKind kind) {
  return kind == TransitionKind::bifurcation ? "bifurcation" : "collision";
}

std::size_t GridSpec::unknowns() const {
  return boundary == Boundary::dirichlet ? static_cast<std::size_t>(n_points - 2)
                                         : static_cast<std::size_t>(n_points - 1);
}

std::vector<double> GridSpec::nodes() const {
  const double h = spacing();
  std::vector<double> x(unknowns());
  const int offset = boundary == Boundary::dirichlet ? 1 : 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = -half_width + h * static_cast<double>(static_cast<int>(j) + offset);
  }
  return x;
}

void GridSpec::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("grid half-width must be positive");
  }
  if (n_points < 3) throw std::invalid_argument("grid needs at least 3 points");
  if (!(truncation_tol > 0.0)) throw std::invalid_argument("truncation tolerance must be positive");
  if (sech(half_width) >= truncation_tol) {
    throw std::invalid_argument("grid half-width " + std::to_string(half_width) +
                                " leaves sech(L) above the truncation tolerance");
  }
}

cplx LatticeHamiltonian::operator()(std::size_t row, std::size_t col) const {
  const std::size_t n = size();
  if (row == col) return diagonal[row];
  if (row + 1 == col || col + 1 == row) return hopping;
  if (n > 2 && row == 0 && col == n - 1) return corner_upper;
  if (n > 2 && row == n - 1 && col == 0) return corner_lower;
  return 0.0;
}

std::vector<cplx> LatticeHamiltonian::apply(std::span<const cplx> v) const {
  const std::size_t n = size();
  if (v.size() != n) throw std::invalid_argument("vector size does not match the Hamiltonian");
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc = diagonal[j] * v[j];
    if (j > 0) acc += hopping * v[j - 1];
    if (j + 1 < n) acc += hopping * v[j + 1];
    out[j] = acc;
  }
  if (n > 2) {
    out[0] += corner_upper * v[n - 1];
    out[n - 1] += corner_lower * v[0];
  }
  return out;
}

LatticeHamiltonian build_hamiltonian(const PotentialParams& p, const GridSpec& grid) {
  p.validate();
  grid.validate();
  LatticeHamiltonian H;
  H.h = grid.spacing();
  H.boundary = grid.boundary;
  const double inv_h2 = 1.0 / (H.h * H.h);
  H.hopping = -inv_h2;
  H.x = grid.nodes();
  H.diagonal.resize(H.x.size());
  double vmax = 0.0;
  for (std::size_t j = 0; j < H.x.size(); ++j) {
    const cplx v = eval_V(H.x[j], p);
    vmax = std::max(vmax, std::abs(v));
    H.diagonal[j] = 2.0 * inv_h2 + v;
  }
  H.coarse = H.h * H.h * vmax > 1.0;
  if (grid.boundary == Boundary::twisted_periodic) {
    // psi_{-1} = e^{-i pi/2} psi_{N-1},  psi_N = e^{i pi/2} psi_0
    H.corner_upper = -inv_h2 * cplx(0.0, -1.0);
    H.corner_lower = -inv_h2 * cplx(0.0, 1.0);
  }
  return H;
}

double physical_energy_cutoff(const GridSpec& grid, const DetectionOptions& opt) {
  const double h = grid.spacing();
  return opt.window_fraction * 4.0 / (h * h);
}

SpectrumResult compute_spectrum(const PotentialParams& p, const GridSpec& grid,
                                const SpectrumResult* warm_start) {
  const LatticeHamiltonian H = build_hamiltonian(p, grid);
  std::span<const cplx> guess;
  if (warm_start != nullptr && warm_start->grid == grid) guess = warm_start->eigenvalues;
  std::vector<cplx> ev = lattice_eigenvalues(H, guess);

  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  // Conjugate partners differ in Re only by round-off; put Im < 0 first so the
  // order does not depend on the last bit.
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    if (std::abs(ev[i] - std::conj(ev[i + 1])) <= 1e-9 * (1.0 + std::abs(ev[i])) && ev[i].imag() > ev[i + 1].imag()) {
      std::swap(ev[i], ev[i + 1]);
      ++i;
    }
  }

  SpectrumResult out;
  out.params = p;
  out.grid = grid;
  out.coarse_grid = H.coarse;
  out.ipr.resize(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    out.ipr[i] = inverse_participation_ratio(lattice_eigenvector(H, ev[i]));
  }
  out.eigenvalues = std::move(ev);
  return out;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

StateClasses classify_states(const SpectrumResult& s, const DetectionOptions& opt) {
  if (!(opt.im_threshold > 0.0) || !(opt.ipr_factor > 0.0)) {
    throw std::invalid_argument("classification thresholds must be positive");
  }
  const double cutoff = physical_energy_cutoff(s.grid, opt);
  const double ipr_cut = opt.ipr_factor * median(s.ipr);
  StateClasses out;
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    const cplx e = s.eigenvalues[i];
    const bool physical = e.real() < cutoff;
    if (physical && std::abs(e.imag()) > opt.im_threshold) {
      out.complex_pair.push_back(i);
    } else if (std::abs(e.imag()) <= opt.im_threshold && e.real() < 0.0 && s.ipr[i] > ipr_cut) {
      out.bound.push_back(i);
    } else {
      out.continuum.push_back(i);
    }
  }
  return out;
}

double max_imaginary_part(const SpectrumResult& s, const DetectionOptions& opt) {
  const double cutoff = physical_energy_cutoff(s.grid, opt);
  double m = 0.0;
  for (const auto& e : s.eigenvalues)
    if (e.real() < cutoff) m = std::max(m, std::abs(e.imag()));
  return m;
}

bool has_complex_pair(const SpectrumResult& s, const DetectionOptions& opt) {
  return max_imaginary_part(s, opt) > opt.im_threshold;
}

std::optional<cplx> leading_pair(const SpectrumResult& s, const DetectionOptions& opt) {
  const double cutoff = physical_energy_cutoff(s.grid, opt);
  std::optional<cplx> best;
  for (const auto& e : s.eigenvalues) {
    if (e.real() >= cutoff || e.imag() <= opt.im_threshold) continue;
    if (!best || e.imag() > best->imag()) best = e;
  }
  return best;
}

SweepSummary summarize(const SpectrumResult& s, const DetectionOptions& opt) {
  SweepSummary out;
  out.g = s.params.g;
  out.max_im = max_imaginary_part(s, opt);
  if (const auto pair = leading_pair(s, opt)) {
    out.pair_re = pair->real();
    out.pair_im = pair->imag();
  }
  const StateClasses classes = classify_states(s, opt);
  out.n_pairs = static_cast<int>(classes.complex_pair.size() / 2);
  out.n_bound = static_cast<int>(classes.bound.size());
  out.ground_re = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.front().real();
  return out;
}

namespace {

struct Bisection {
  double broken_g;      // end of the final bracket holding the pair
  double unbroken_g;    // end without it
  SpectrumResult broken;
  SpectrumResult unbroken;
  int evaluations = 0;
};

Bisection bisect_pair_indicator(double A, double g_lo, double g_hi, const GridSpec& grid,
                                double tol_g, const DetectionOptions& opt) {
  if (!(g_lo < g_hi)) throw std::invalid_argument("bracket must satisfy g_lo < g_hi");
  if (!(tol_g > 0.0)) throw std::invalid_argument("tol_g must be positive");
  const PotentialParams base{0.0, A, Profile::sech};

  auto spectrum_at = [&](double g, const SpectrumResult* warm) {
    PotentialParams p = base;
    p.g = g;
    return compute_spectrum(p, grid, warm);
  };

  Bisection b;
  SpectrumResult lo = spectrum_at(g_lo, nullptr);
  SpectrumResult hi = spectrum_at(g_hi, &lo);
  b.evaluations = 2;
  const bool pair_lo = has_complex_pair(lo, opt);
  const bool pair_hi = has_complex_pair(hi, opt);
  if (pair_lo == pair_hi) {
    throw TransitionNotFound(std::string("no change of the complex-pair indicator on [") +
                             std::to_string(g_lo) + ", " + std::to_string(g_hi) + "] at A = " +
                             std::to_string(A) + (pair_lo ? " (pair at both ends)" : " (no pair at either end)"));
  }
  double a = g_lo, c = g_hi;
  while (c - a > tol_g) {
    const double mid = 0.5 * (a + c);
    SpectrumResult s = spectrum_at(mid, &lo);
    ++b.evaluations;
    if (has_complex_pair(s, opt) == pair_lo) {
      a = mid;
      lo = std::move(s);
    } else {
      c = mid;
      hi = std::move(s);
    }
  }
  if (pair_lo) {
    b.broken_g = a, b.unbroken_g = c;
    b.broken = std::move(lo), b.unbroken = std::move(hi);
  } else {
    b.broken_g = c, b.unbroken_g = a;
    b.broken = std::move(hi), b.unbroken = std::move(lo);
  }
  return b;
}

}  // namespace

TransitionPoint find_bifurcation_g(double A, double g_lo, double g_hi, const GridSpec& grid, double tol_g,
                                   const DetectionOptions& opt) {
  Bisection b = bisect_pair_indicator(A, g_lo, g_hi, grid, tol_g, opt);
  const auto pair = leading_pair(b.broken, opt);
  if (!pair || pair->real() <= 0.0) {
    throw TransitionNotFound("pair at the bifurcation does not sit inside the continuum");
  }
  TransitionPoint t;
  t.g_c = 0.5 * (b.broken_g + b.unbroken_g);
  t.kind = TransitionKind::bifurcation;
  t.E_c = *pair;
  t.k_c = std::sqrt(pair->real());
  t.A = A;
  t.bracket_width = std::abs(b.broken_g - b.unbroken_g);
  t.spectra_evaluated = b.evaluations;
  return t;
}

TransitionPoint find_collision_g(double A, double g_lo, double g_hi, const GridSpec& grid, double tol_g,
                                 const DetectionOptions& opt) {
  Bisection b = bisect_pair_indicator(A, g_lo, g_hi, grid, tol_g, opt);
  if (classify_states(b.unbroken, opt).bound.empty()) {
    throw TransitionNotFound("the pair does not turn into a bound state inside the bracket");
  }
  const auto pair = leading_pair(b.broken, opt);
  TransitionPoint t;
  t.g_c = 0.5 * (b.broken_g + b.unbroken_g);
  t.kind = TransitionKind::collision;
  t.E_c = pair.value_or(cplx{});
  t.k_c = 0.0;
  t.A = A;
  t.bracket_width = std::abs(b.broken_g - b.unbroken_g);
  t.spectra_evaluated = b.evaluations;
  return t;
}

std::vector<SpectrumResult> spectrum_sweep(double A, std::span<const double> g_values, const GridSpec& grid,
                                           int threads) {
  if (g_values.empty()) throw std::invalid_argument("spectrum sweep needs at least one g value");
  constexpr std::size_t kBlock = 8;
  const std::size_t n = g_values.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<SpectrumResult> out(n);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const SpectrumResult* previous = nullptr;
    for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
      out[i] = compute_spectrum({g_values[i], A, Profile::sech}, grid, previous);
      previous = &out[i];
    }
  });
  return out;
}

}  // namespace ssatlas
