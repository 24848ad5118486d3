#pragma once

// Transfer matrix of the potential and the transmission/reflection
// coefficients derived from it.
//
// Far from the potential psi = a e^{ikx} + b e^{-ikx} on the left and
// c e^{ikx} + d e^{-ikx} on the right; (c, d) = M (a, b).

#include <stdexcept>
#include <string>
#include <vector>

#include "ssatlas/potential.hpp"

namespace ssatlas {

class ScatteringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TransferMatrix {
  cplx m11{1.0}, m12{}, m21{}, m22{1.0};
  // m11 m22 - m12 m21 evaluated in the integration's working precision.
  // Recomputing it from the rounded entries loses about eps |M|^2.
  cplx det{1.0};
  double k = 0.0;
  PotentialParams params;
  bool quad_precision = false;  // integrated in 128-bit floating point

  // Frobenius norm.
  double norm() const;
};

// Smallest half-width L with A sech(L) < tol * max(1, k^2).
double minimum_half_width(double A, double k, double tol = 1e-10);

// adaptive: long double, repeated in 128-bit precision when |M| > 1e3 so that
//   det M stays within 100 rel_tol of 1 even behind opaque barriers.
// extended: long double only. Much faster behind opaque barriers, where the
//   det check then also allows the round-off floor 64 eps |M|^2.
enum class TransferPrecision { adaptive, extended };

// Integrates the two fundamental solutions from -L to +L with DOP853.
// Throws std::invalid_argument for k <= 0 or an L that truncates the tail
// too early, ode::IntegrationError on step failure and ScatteringError when
// |det M - 1| exceeds 100 rel_tol.
TransferMatrix integrate_transfer_matrix(const PotentialParams& p, double k, double L = 25.0,
                                         double rel_tol = 1e-10,
                                         TransferPrecision precision = TransferPrecision::adaptive);

struct ScatteringCoefficients {
  double T = 1.0;
  double R_left = 0.0;
  double R_right = 0.0;
  bool overflow = false;  // |m22| < 1e-12 |M|; the values are clamped there
};

inline constexpr double kSmallKGuard = 1e-3;

// Throws std::invalid_argument for k below kSmallKGuard.
ScatteringCoefficients scattering_coefficients(const TransferMatrix& M);

enum class SweepAxis { g, k };
std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct ScatteringSweepSpec {
  SweepAxis axis = SweepAxis::k;
  double A = 1.5;
  double fixed = 0.0;  // k when sweeping g, g when sweeping k
  double lo = 0.5;
  double hi = 1.5;
  int n_samples = 101;  // inclusive of both ends
  double half_width = 25.0;
  double rel_tol = 1e-10;

  void validate() const;
  std::vector<double> axis_values() const;
};

struct ScatteringRow {
  double axis_value = 0.0;
  ScatteringCoefficients coeff;
  TransferMatrix M;
};

// Rows in ascending axis order, independent of the thread count.
std::vector<ScatteringRow> scattering_sweep(const ScatteringSweepSpec& spec, int threads = 1);

}  // namespace ssatlas
