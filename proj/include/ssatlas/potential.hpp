#pragma once

// Wadati-form complex potentials V(x) = -W(x)^2 - 2 g W(x) - i W'(x) and the
// sech profile W(x) = A sech(x) that the rest of the toolkit is built around.
//
// Units: hbar = 2m = 1, so the Schroedinger operator is -d^2/dx^2 + V(x) and
// a plane wave e^{ikx} carries energy E = k^2.

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace ssatlas {

using cplx = std::complex<double>;

enum class Profile { sech };

std::string to_string(Profile profile);
Profile profile_from_string(const std::string& name);

struct PotentialParams {
  double g = 0.0;
  double A = 0.0;
  Profile profile = Profile::sech;

  // Throws std::invalid_argument unless g, A are finite and A >= 0.
  void validate() const;

  bool operator==(const PotentialParams&) const = default;
};

// A real localized profile together with its derivative.
struct ProfilePair {
  std::function<double(double)> W;
  std::function<double(double)> dW;
};

ProfilePair sech_profile(double A);
ProfilePair make_profile(const PotentialParams& p);

double sech(double x);

// W(x) = A sech(x)
double eval_W(double x, double A);

// V(x) for the sech profile, evaluated in closed form.
cplx eval_V(double x, const PotentialParams& p);

// V(x) = -W^2 - 2 g W - i W' for an arbitrary profile.
cplx eval_V_generic(double x, const ProfilePair& profile, double g);

// True iff |V(-x) - conj(V(x))| <= tol at every sample point.
bool check_pt_symmetry(const PotentialParams& p, std::span<const double> sample_points, double tol);
bool check_pt_symmetry(const ProfilePair& profile, double g, std::span<const double> sample_points,
                       double tol);

// Closed-form bound state that exists on the curve A = 1/(1 - 4 g^2), |g| < 1/2.
//
//   psi(x) = e^{(A-1)x} (e^x - i)^{-A} (e^x + i)^{1-A} (1 - c e^x),
//   c = (2g + i)/(1 + 2ig),          E = -16 g^4 / (1 - 4 g^2)^2 = -(A-1)^2.
//
// Complex powers take the principal branch; the bases never touch the real
// axis so psi is continuous in x. The normalization is arbitrary.
class ExactBoundState {
 public:
  explicit ExactBoundState(double g);

  double g() const { return g_; }
  double A() const { return A_; }
  double energy() const { return energy_; }
  PotentialParams params() const { return {g_, A_, Profile::sech}; }

  // g == 0 puts E = 0 on the continuum edge; psi no longer decays.
  bool marginal() const { return g_ == 0.0; }

  // Evaluated through complex logarithms, so no intermediate overflows.
  cplx psi(double x) const;
  cplx log_psi(double x) const;

 private:
  double g_;
  double A_;
  double energy_;
  cplx c_;
};

// Throws std::domain_error for g^2 >= 1/4.
ExactBoundState exact_bound_state(double g);

// Normalized finite-difference residual
//   max_i | -(psi(x_i+h) - 2 psi(x_i) + psi(x_i-h))/h^2 + (V(x_i) - E) psi(x_i) | / max_i |psi(x_i)|
// taken over the interior points of `grid` (the first and last points are skipped).
// Throws std::invalid_argument for a grid with fewer than three points or h <= 0.
double schrodinger_residual(const std::function<cplx(double)>& psi, cplx E, const PotentialParams& p,
                            std::span<const double> grid, double h);

}  // namespace ssatlas
