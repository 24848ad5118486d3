#pragma once

// Spectral singularities: real (g, k) where the transfer-matrix entry m22
// vanishes, their count per amplitude A and the curves g*(A).

#include <optional>
#include <stdexcept>
#include <vector>

#include "ssatlas/eigensolver.hpp"
#include "ssatlas/scattering.hpp"

namespace ssatlas {

class NewtonFailure : public std::runtime_error {
 public:
  enum class Reason { diverged, singular_jacobian, below_k_guard, stalled };

  NewtonFailure(Reason reason, const std::string& what) : std::runtime_error(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct NewtonOptions {
  double tol = 1e-9;  // on |m22|
  int max_iter = 50;
  double fd_step = 1e-6;
  int max_halvings = 8;
  double half_width = 25.0;
  double rel_tol = 1e-10;
};

struct SSRoot {
  double g_star = 0.0;
  double k_star = 0.0;
  double residual = 0.0;  // |m22(g*, k*)|
  double A = 0.0;
  int newton_iterations = 0;
  double m_norm = 0.0;      // Frobenius norm of M at the root
  double m11_abs = 0.0;     // |m11|, the time-reversed singularity
  double det_residual = 0.0;  // |m12 m21 + 1|
};

// Damped Newton on (Re m22, Im m22) with forward-difference Jacobian.
SSRoot find_ss(double A, double g0, double k0, const NewtonOptions& opt = {});

struct ScanWindow {
  double g_lo = -3.5, g_hi = 0.0;
  double k_lo = 0.05, k_hi = 3.5;

  // g in [-(A+2), 0], k in [0.05, A+2].
  static ScanWindow defaults(double A);
  void validate() const;
  bool contains(double g, double k) const;
  bool operator==(const ScanWindow&) const = default;
};

struct ScanOptions {
  int coarse_n = 64;            // grid points per axis
  double seed_threshold = 1.0;  // only minima of |m22| below this seed Newton
  double dedup_radius = 1e-4;
  double coarse_rel_tol = 1e-7;  // integrator tolerance for the coarse grid
  NewtonOptions newton;
  int threads = 1;
};

// Roots inside the window sorted by g*. An empty list is a valid result.
std::vector<SSRoot> scan_ss(double A, const ScanWindow& window, const ScanOptions& opt = {});

// floor(A + 1/2); throws std::invalid_argument for negative A.
int predicted_count(double A);

struct SSAtlas {
  double A = 0.0;
  ScanWindow window;
  std::vector<SSRoot> roots;
  int count = 0;
  int predicted_count = 0;
  // A sits within 1e-9 of a half-odd-integer, where the law is not asserted.
  bool boundary = false;
};

SSAtlas count_ss(double A, const std::optional<ScanWindow>& window = std::nullopt, const ScanOptions& opt = {});

struct GcCurvePoint {
  double A = 0.0;
  std::vector<SSRoot> roots;  // sorted by g*
  int warm_started = 0;       // roots reached from the previous A
};

// A values are processed in the given order. Each A is scanned; with
// warm_start the previous roots are also continued by Newton and merged in.
std::vector<GcCurvePoint> trace_gc_curve(const std::vector<double>& A_values, bool warm_start = true,
                                         const ScanOptions& opt = {});

struct CrossValidation {
  double A = 0.0;
  bool ss_found = false;
  bool transition_found = false;
  std::optional<SSRoot> root;  // the most negative g*
  std::optional<TransitionPoint> transition;
  double dg = 0.0;  // |g* - g_c|
  double dk = 0.0;  // |k* - k_c|
};

struct CrossValidationOptions {
  GridSpec grid;
  GridSpec onset_grid{25.0, 501, Boundary::twisted_periodic, 1e-10};
  double onset_step = 0.05;
  double tol_g = 1e-3;
  DetectionOptions detection;
  ScanOptions scan;
};

// The SS side scans the default window; the spectral side walks g upward
// from the window's lower edge on a coarse grid until a complex pair shows
// up, then bisects on the full grid. Absence on both sides is reported, not
// thrown; absence on one side only throws TransitionNotFound.
CrossValidation cross_validate_transition(double A, const CrossValidationOptions& opt = {});

}  // namespace ssatlas
