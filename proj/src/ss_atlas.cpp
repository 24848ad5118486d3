#include "ssatlas/ss_atlas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ssatlas/parallel.hpp"

namespace ssatlas {

namespace {

template <class... Args>
std::string fmt(const char* pattern, Args... args) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

TransferMatrix transfer(double A, double g, double k, double L, double rel_tol) {
  return integrate_transfer_matrix({g, A, Profile::sech}, k, L, rel_tol, TransferPrecision::extended);
}

SSRoot make_root(double A, double g, double k, int iterations, const NewtonOptions& opt) {
  const TransferMatrix M = transfer(A, g, k, opt.half_width, opt.rel_tol);
  SSRoot r;
  r.g_star = g;
  r.k_star = k;
  r.residual = std::abs(M.m22);
  r.A = A;
  r.newton_iterations = iterations;
  r.m_norm = M.norm();
  r.m11_abs = std::abs(M.m11);
  r.det_residual = std::abs(M.m12 * M.m21 + 1.0);
  return r;
}

}  // namespace

SSRoot find_ss(double A, double g0, double k0, const NewtonOptions& opt) {
  if (!(opt.tol > 0.0) || opt.max_iter < 1 || !(opt.fd_step > 0.0) || opt.max_halvings < 0) {
    throw std::invalid_argument("invalid Newton options");
  }
  if (!(k0 >= kSmallKGuard)) {
    throw NewtonFailure(NewtonFailure::Reason::below_k_guard, fmt("seed k0 = %.6g is below the small-k guard", k0));
  }
  PotentialParams{g0, A, Profile::sech}.validate();

  auto m22 = [&](double g, double k) { return transfer(A, g, k, opt.half_width, opt.rel_tol).m22; };

  double g = g0, k = k0;
  cplx F = m22(g, k);
  double r = std::abs(F);
  for (int it = 0; it < opt.max_iter; ++it) {
    if (r < opt.tol) return make_root(A, g, k, it, opt);

    const double d = opt.fd_step;
    const cplx Fg = (m22(g + d, k) - F) / d;
    const cplx Fk = (m22(g, k + d) - F) / d;
    const double j11 = Fg.real(), j12 = Fk.real(), j21 = Fg.imag(), j22 = Fk.imag();
    const double det = j11 * j22 - j12 * j21;
    const double jscale = std::max({std::abs(j11), std::abs(j12), std::abs(j21), std::abs(j22), 1e-300});
    if (std::abs(det) < 1e-14 * jscale * jscale) {
      throw NewtonFailure(NewtonFailure::Reason::singular_jacobian,
                          fmt("singular Jacobian at g = %.10g, k = %.10g (A = %.6g)", g, k, A));
    }
    double dg = -(j22 * F.real() - j12 * F.imag()) / det;
    double dk = -(-j21 * F.real() + j11 * F.imag()) / det;
    const double len = std::hypot(dg, dk);
    if (len < 1e-14) {
      throw NewtonFailure(NewtonFailure::Reason::stalled,
                          fmt("Newton step vanished at g = %.10g, k = %.10g, |m22| = %.3g", g, k, r));
    }
    if (len > 1.0) dg /= len, dk /= len;

    double lambda = 1.0;
    bool accepted = false, guard_hit = false;
    for (int h = 0; h <= opt.max_halvings; ++h, lambda *= 0.5) {
      const double gn = g + lambda * dg, kn = k + lambda * dk;
      if (kn < kSmallKGuard) {
        guard_hit = true;
        continue;
      }
      const cplx Fn = m22(gn, kn);
      if (std::abs(Fn) < r) {
        g = gn, k = kn, F = Fn, r = std::abs(Fn);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (guard_hit) {
        throw NewtonFailure(NewtonFailure::Reason::below_k_guard,
                            fmt("Newton drifted below the small-k guard near g = %.10g, k = %.10g", g, k));
      }
      throw NewtonFailure(NewtonFailure::Reason::stalled,
                          fmt("no descent after step halving at g = %.10g, k = %.10g, |m22| = %.3g", g, k, r));
    }
  }
  if (r < opt.tol) return make_root(A, g, k, opt.max_iter, opt);
  throw NewtonFailure(NewtonFailure::Reason::diverged,
                      fmt("Newton did not converge: |m22| = %.3g at g = %.10g, k = %.10g", r, g, k));
}

ScanWindow ScanWindow::defaults(double A) { return {-(A + 2.0), 0.0, 0.05, A + 2.0}; }

void ScanWindow::validate() const {
  if (!(g_lo < g_hi)) throw std::invalid_argument("scan window needs g_lo < g_hi");
  if (!(k_lo < k_hi)) throw std::invalid_argument("scan window needs k_lo < k_hi");
  if (!(k_lo >= kSmallKGuard)) throw std::invalid_argument("scan window k_lo is below the small-k guard");
}

bool ScanWindow::contains(double g, double k) const { return g >= g_lo && g <= g_hi && k >= k_lo && k <= k_hi; }

std::vector<SSRoot> scan_ss(double A, const ScanWindow& window, const ScanOptions& opt) {
  window.validate();
  if (opt.coarse_n < 16) throw std::invalid_argument("coarse_n must be at least 16");
  PotentialParams{window.g_lo, A, Profile::sech}.validate();
  const std::size_t n = static_cast<std::size_t>(opt.coarse_n);
  if (A == 0.0) return {};

  auto axis = [n](double lo, double hi, std::size_t i) {
    return i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<double> gs(n), ks(n);
  for (std::size_t i = 0; i < n; ++i) {
    gs[i] = axis(window.g_lo, window.g_hi, i);
    ks[i] = axis(window.k_lo, window.k_hi, i);
  }

  // |m22| on the coarse grid, row i <-> g_i.
  std::vector<double> mag(n * n);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      mag[i * n + j] = std::abs(transfer(A, gs[i], ks[j], opt.newton.half_width, opt.coarse_rel_tol).m22);
    }
  });

  struct Seed {
    double g, k;
  };
  std::vector<Seed> seeds;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = mag[i * n + j];
      if (!(v < opt.seed_threshold)) continue;
      bool strict_min = true;
      for (int di = -1; di <= 1 && strict_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const auto ii = static_cast<std::ptrdiff_t>(i) + di, jj = static_cast<std::ptrdiff_t>(j) + dj;
          if (ii < 0 || jj < 0 || ii >= static_cast<std::ptrdiff_t>(n) || jj >= static_cast<std::ptrdiff_t>(n)) continue;
          if (mag[static_cast<std::size_t>(ii) * n + static_cast<std::size_t>(jj)] <= v) {
            strict_min = false;
            break;
          }
        }
      }
      if (strict_min) seeds.push_back({gs[i], ks[j]});
    }
  }

  std::vector<std::optional<SSRoot>> found(seeds.size());
  parallel_for(seeds.size(), opt.threads, [&](std::size_t s) {
    try {
      found[s] = find_ss(A, seeds[s].g, seeds[s].k, opt.newton);
    } catch (const NewtonFailure&) {
    } catch (const ScatteringError&) {
    }
  });

  std::vector<SSRoot> roots;
  for (const auto& r : found) {
    if (!r || !window.contains(r->g_star, r->k_star)) continue;
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const SSRoot& q) {
      return std::hypot(q.g_star - r->g_star, q.k_star - r->k_star) < opt.dedup_radius;
    });
    if (!duplicate) roots.push_back(*r);
  }
  std::sort(roots.begin(), roots.end(), [](const SSRoot& a, const SSRoot& b) { return a.g_star < b.g_star; });
  return roots;
}

int predicted_count(double A) {
  if (!(A >= 0.0) || !std::isfinite(A)) throw std::invalid_argument("A must be finite and non-negative");
  return static_cast<int>(std::floor(A + 0.5));
}

SSAtlas count_ss(double A, const std::optional<ScanWindow>& window, const ScanOptions& opt) {
  SSAtlas atlas;
  atlas.A = A;
  atlas.predicted_count = predicted_count(A);
  atlas.window = window.value_or(ScanWindow::defaults(A));
  atlas.roots = scan_ss(A, atlas.window, opt);
  atlas.count = static_cast<int>(atlas.roots.size());
  atlas.boundary = std::abs(A + 0.5 - std::round(A + 0.5)) < 1e-9;
  return atlas;
}

std::vector<GcCurvePoint> trace_gc_curve(const std::vector<double>& A_values, bool warm_start,
                                         const ScanOptions& opt) {
  if (A_values.empty()) throw std::invalid_argument("trace needs at least one A value");
  for (double A : A_values) predicted_count(A);

  std::vector<GcCurvePoint> out;
  out.reserve(A_values.size());
  for (double A : A_values) {
    GcCurvePoint point;
    point.A = A;
    const ScanWindow window = ScanWindow::defaults(A);
    std::vector<SSRoot> candidates;
    if (warm_start && !out.empty()) {
      for (const auto& prev : out.back().roots) {
        try {
          SSRoot r = find_ss(A, prev.g_star, prev.k_star, opt.newton);
          if (window.contains(r.g_star, r.k_star)) {
            candidates.push_back(r);
            ++point.warm_started;
          }
        } catch (const NewtonFailure&) {
        } catch (const ScatteringError&) {
        }
      }
    }
    // Roots lost by continuation and newly born branches come from the scan.
    for (auto& r : scan_ss(A, window, opt)) candidates.push_back(r);

    for (const auto& r : candidates) {
      const bool duplicate = std::any_of(point.roots.begin(), point.roots.end(), [&](const SSRoot& q) {
        return std::hypot(q.g_star - r.g_star, q.k_star - r.k_star) < opt.dedup_radius;
      });
      if (!duplicate) point.roots.push_back(r);
    }
    std::sort(point.roots.begin(), point.roots.end(),
              [](const SSRoot& a, const SSRoot& b) { return a.g_star < b.g_star; });
    out.push_back(std::move(point));
  }
  return out;
}

CrossValidation cross_validate_transition(double A, const CrossValidationOptions& opt) {
  CrossValidation cv;
  cv.A = A;
  const ScanWindow window = ScanWindow::defaults(A);
  const std::vector<SSRoot> roots = scan_ss(A, window, opt.scan);
  if (!roots.empty()) {
    cv.ss_found = true;
    cv.root = roots.front();
  }

  // Walk g upward on the coarse grid until a pair appears.
  std::optional<double> onset;
  SpectrumResult previous;
  bool have_previous = false;
  const int steps = static_cast<int>(std::ceil((window.g_hi - window.g_lo) / opt.onset_step));
  for (int i = 0; i <= steps; ++i) {
    const double g = std::min(window.g_hi, window.g_lo + opt.onset_step * i);
    SpectrumResult s = compute_spectrum({g, A, Profile::sech}, opt.onset_grid, have_previous ? &previous : nullptr);
    if (has_complex_pair(s, opt.detection)) {
      if (i == 0) throw TransitionNotFound("complex pair already present at the lower edge of the window");
      onset = g;
      break;
    }
    previous = std::move(s);
    have_previous = true;
  }
  if (onset) {
    try {
      cv.transition = find_bifurcation_g(A, *onset - opt.onset_step, *onset, opt.grid, opt.tol_g, opt.detection);
    } catch (const TransitionNotFound&) {
      cv.transition = find_bifurcation_g(A, *onset - 2.0 * opt.onset_step, std::min(window.g_hi, *onset + opt.onset_step),
                                         opt.grid, opt.tol_g, opt.detection);
    }
    cv.transition_found = true;
  }

  if (cv.ss_found != cv.transition_found) {
    throw TransitionNotFound(cv.ss_found ? "spectral singularity found but no bifurcation in the spectrum"
                                         : "bifurcation found in the spectrum but no spectral singularity");
  }
  if (cv.ss_found) {
    cv.dg = std::abs(cv.root->g_star - cv.transition->g_c);
    cv.dk = std::abs(cv.root->k_star - cv.transition->k_c);
  }
  return cv;
}

}  // namespace ssatlas
