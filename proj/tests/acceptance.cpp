// One PASS/FAIL line per acceptance criterion. With arguments, only the
// listed criteria run, e.g. `acceptance 2 4`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/rk4_transfer.hpp"
#include "ssatlas/run.hpp"
#include "ssatlas/ss_atlas.hpp"

using namespace ssatlas;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

const GridSpec kGrid{25.0, 2001, Boundary::twisted_periodic, 1e-10};

Verdict exact_solution() {
  Verdict v;
  const double g = -1.0 / (2.0 * std::sqrt(3.0));
  const PotentialParams p{g, 1.5, Profile::sech};
  const SpectrumResult s = compute_spectrum(p, kGrid);
  const StateClasses c = classify_states(s);
  if (c.bound.size() != 1) {
    v.require(false, "exactly one bound state (found " + std::to_string(c.bound.size()) + ")");
  } else {
    const cplx e = s.eigenvalues[c.bound[0]];
    v.require(std::abs(e - cplx(-0.25)) < 1e-3, fmt("E = %.6f%+.1ei within 1e-3 of -0.25", e.real(), e.imag()));
  }

  const ExactBoundState es = exact_bound_state(g);
  auto residual = [&](double h) {
    std::vector<double> xs;
    const long n = std::lround(40.0 / h);
    for (long i = 0; i <= n; ++i) xs.push_back(-20.0 + h * i);
    return schrodinger_residual([&](double x) { return es.psi(x); }, es.energy(), p, xs, h);
  };
  const double r1 = residual(1e-3), r2 = residual(5e-4);
  v.require(r1 < 1e-5, fmt("residual %.2e < 1e-5 at h = 1e-3", r1));
  v.require(std::abs(r1 / r2 - 4.0) < 0.4, fmt("h^2 scaling (ratio %.3f)", r1 / r2));
  return v;
}

Verdict first_transition() {
  Verdict v;
  const TransitionPoint t = find_bifurcation_g(1.5, -1.0, -0.85, kGrid, 1e-3);
  v.require(t.g_c >= -0.940 && t.g_c <= -0.917, fmt("g_c = %.4f in [-0.940, -0.917]", t.g_c));
  v.require(std::abs(t.E_c.real() - 1.038) <= 0.04, fmt("E_c = %.4f within 0.04 of 1.038", t.E_c.real()));
  v.require(std::abs(t.k_c - 1.019) <= 0.02, fmt("k_c = %.4f within 0.02 of 1.019", t.k_c));
  return v;
}

Verdict second_transition() {
  Verdict v;
  const TransitionPoint t = find_collision_g(1.5, -0.45, -0.3, kGrid, 1e-3);
  v.require(std::abs(t.g_c + 0.365) <= 0.010, fmt("g_c = %.4f within 0.010 of -0.365", t.g_c));

  const SpectrumResult above = compute_spectrum({t.g_c + 0.01, 1.5, Profile::sech}, kGrid);
  const StateClasses ca = classify_states(above);
  bool bound = false;
  for (std::size_t i : ca.bound) bound = bound || above.eigenvalues[i].real() < 0.0;
  v.require(bound, fmt("bound state at g_c + 0.01 = %.4f", t.g_c + 0.01));
  const SpectrumResult below = compute_spectrum({t.g_c - 0.01, 1.5, Profile::sech}, kGrid);
  v.require(has_complex_pair(below), fmt("complex pair at g_c - 0.01 = %.4f", t.g_c - 0.01));
  return v;
}

Verdict ss_location() {
  Verdict v;
  const SSRoot r = find_ss(1.5, -0.93, 1.0);
  v.require(r.g_star >= -0.940 && r.g_star <= -0.917, fmt("g* = %.6f in [-0.940, -0.917]", r.g_star));
  v.require(std::abs(r.k_star - 1.019) <= 0.005, fmt("k* = %.6f within 0.005 of 1.019", r.k_star));
  v.require(r.residual < 1e-9, fmt("|m22| = %.1e < 1e-9", r.residual));

  auto coeff = [&](double d) {
    return scattering_coefficients(integrate_transfer_matrix({r.g_star + d, 1.5, Profile::sech}, r.k_star + d));
  };
  const auto at = coeff(0.0);
  v.require(at.T > 1e3 && at.R_left > 1e3 && at.R_right > 1e3,
            fmt("T, R_left, R_right = %.2e, %.2e, %.2e > 1e3 at the root", at.T, at.R_left, at.R_right));
  bool monotone = true;
  ScatteringCoefficients prev = coeff(1e-1);
  for (double d : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const auto c = coeff(d);
    monotone = monotone && c.T > prev.T && c.R_left > prev.R_left && c.R_right > prev.R_right;
    prev = c;
  }
  monotone = monotone && at.T > prev.T && at.R_left > prev.R_left && at.R_right > prev.R_right;
  v.require(monotone, "monotone growth along the approach");
  return v;
}

Verdict correspondence() {
  Verdict v;
  CrossValidationOptions opt;
  opt.grid = kGrid;
  const CrossValidation cv = cross_validate_transition(1.5, opt);
  v.require(cv.ss_found && cv.transition_found, "both sides found");
  if (cv.ss_found && cv.transition_found) {
    v.require(cv.dg < 0.01, fmt("|g* - g_c| = %.4f < 0.01 (g* = %.4f, g_c = %.4f)", cv.dg, cv.root->g_star, cv.transition->g_c));
    v.require(cv.dk < 0.02, fmt("|k* - k_c| = %.4f < 0.02 (k* = %.4f, k_c = %.4f)", cv.dk, cv.root->k_star, cv.transition->k_c));
  }
  return v;
}

Verdict staircase() {
  Verdict v;
  const std::vector<std::pair<double, int>> expect = {{0.25, 0}, {0.75, 1}, {1.25, 1}, {1.75, 2}, {2.25, 2},
                                                      {2.75, 3}, {1.0, 1},  {2.0, 2},  {3.0, 3}};
  std::string counts;
  for (const auto& [A, n] : expect) {
    const SSAtlas atlas = count_ss(A);
    if (atlas.count != n) v.pass = false;
    counts += fmt("%g:%g", A, atlas.count) + (atlas.count == n ? " " : "(want " + std::to_string(n) + ") ");
  }
  v.detail = "counts " + counts;
  return v;
}

Verdict properties() {
  Verdict v;
  std::mt19937_64 rng(20241019);
  std::uniform_real_distribution<double> uA(0.0, 3.0), ug(-2.0, 1.0), uk(0.1, 3.0);
  const GridSpec grid{25.0, 1001, Boundary::twisted_periodic, 1e-10};
  double det = 0.0, pt = 0.0, conj = 0.0;
  for (int i = 0; i < 200; ++i) {
    const PotentialParams p{ug(rng), uA(rng), Profile::sech};
    const double k = uk(rng);
    const TransferMatrix M = integrate_transfer_matrix(p, k);
    det = std::max(det, std::abs(M.det - 1.0));
    pt = std::max(pt, std::abs(M.m11 - std::conj(M.m22)) / M.norm());

    const SpectrumResult s = compute_spectrum(p, grid);
    double radius = 0.0;
    for (cplx e : s.eigenvalues) radius = std::max(radius, std::abs(e));
    for (cplx e : s.eigenvalues) {
      double best = 1e300;
      for (cplx f : s.eigenvalues) best = std::min(best, std::abs(std::conj(e) - f));
      conj = std::max(conj, best / radius);
    }
  }
  v.require(det < 1e-8, fmt("|det M - 1| max %.1e < 1e-8", det));
  v.require(pt < 1e-8, fmt("|m11 - conj m22|/|M| max %.1e < 1e-8", pt));
  v.require(conj < 1e-6, fmt("conjugation gap / radius max %.1e < 1e-6", conj));

  double free_m = 0.0, free_s = 0.0;
  for (int i = 0; i < 5; ++i) {
    const PotentialParams p{ug(rng), 0.0, Profile::sech};
    const TransferMatrix M = integrate_transfer_matrix(p, uk(rng));
    free_m = std::max({free_m, std::abs(M.m11 - 1.0), std::abs(M.m22 - 1.0), std::abs(M.m12), std::abs(M.m21)});
    const SpectrumResult s = compute_spectrum(p, grid);
    const std::size_t N = grid.unknowns();
    const double h = grid.spacing();
    std::vector<double> exact;
    for (std::size_t m = 0; m < N; ++m) exact.push_back((2.0 - 2.0 * std::cos((0.5 * M_PI + 2.0 * M_PI * m) / N)) / (h * h));
    std::sort(exact.begin(), exact.end());
    for (std::size_t m = 0; m < N; ++m) free_s = std::max(free_s, std::abs(s.eigenvalues[m] - exact[m]) / exact[m]);
  }
  v.require(free_m < 1e-10, fmt("A = 0 transfer matrix off identity by %.1e < 1e-10", free_m));
  v.require(free_s < 1e-10, fmt("A = 0 spectrum relative error %.1e < 1e-10", free_s));

  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double g = ug(rng), A = uA(rng), k = uk(rng);
    const auto c = scattering_coefficients(integrate_transfer_matrix({g, A, Profile::sech}, k));
    const auto o = oracle::coefficients(oracle::transfer(g, A, k, 25.0));
    worst = std::max({worst, std::abs(c.T - o.T) / o.T, std::abs(c.R_left - o.R_left) / o.R_left,
                      std::abs(c.R_right - o.R_right) / o.R_right});
  }
  v.require(worst < 1e-6, fmt("oracle relative error max %.1e < 1e-6 over 20 samples", worst));
  return v;
}

// Runs the CLI and returns its standard output, or "" on failure.
std::string capture(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return "";
  std::string out;
  char buf[65536];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  return pclose(pipe) == 0 ? out : "";
}

// Drops the wall-time line; everything else must match byte for byte.
std::string strip_wall_time(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("\"wall_time_s\"") != std::string::npos) continue;
    out += line + "\n";
  }
  return out;
}

Verdict determinism() {
  Verdict v;
  const std::vector<std::pair<std::string, std::string>> runs = {{"fig1ab", "spectrum-sweep"},
                                                                 {"fig2a", "scattering-sweep"},
                                                                 {"fig2b", "scattering-sweep"},
                                                                 {"fig3a", "trace-gc"},
                                                                 {"fig3b", "ss-atlas"}};
  for (const auto& [name, command] : runs) {
    const std::string cmd =
        std::string(SSATLAS_CLI) + " " + command + " --config " + SSATLAS_REPRODUCE_DIR + "/" + name + ".json 2>/dev/null";
    const std::string first = strip_wall_time(capture(cmd));
    const std::string second = strip_wall_time(capture(cmd));
    v.require(!first.empty() && first == second, name + " identical");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"exact-solution oracle", exact_solution},   {"first transition", first_transition},
      {"second transition", second_transition},    {"SS location", ss_location},
      {"transition-SS correspondence", correspondence}, {"staircase law", staircase},
      {"property suite", properties},              {"determinism", determinism}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s (%.0f s) %s\n", id, criteria[i].first, v.pass ? "PASS" : "FAIL", secs, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
