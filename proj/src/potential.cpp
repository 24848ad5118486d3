#include "ssatlas/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ssatlas {

std::string to_string(Profile profile) {
  switch (profile) {
    case Profile::sech:
      return "sech";
  }
  return "unknown";
}

Profile profile_from_string(const std::string& name) {
  if (name == "sech") return Profile::sech;
  throw std::invalid_argument("unknown profile '" + name + "'");
}

void PotentialParams::validate() const {
  if (!std::isfinite(g)) throw std::invalid_argument("g must be finite");
  if (!std::isfinite(A) || A < 0.0) throw std::invalid_argument("A must be finite and non-negative");
}

double sech(double x) {
  // cosh overflows to inf for |x| > ~710, which correctly yields 0.
  return 1.0 / std::cosh(x);
}

double eval_W(double x, double A) { return A * sech(x); }

cplx eval_V(double x, const PotentialParams& p) {
  const double s = sech(x);
  const double As = p.A * s;
  return {-As * As - 2.0 * p.g * As, As * std::tanh(x)};
}

cplx eval_V_generic(double x, const ProfilePair& profile, double g) {
  const double w = profile.W(x);
  return {-w * w - 2.0 * g * w, -profile.dW(x)};
}

ProfilePair sech_profile(double A) {
  return {[A](double x) { return A * sech(x); },
          [A](double x) { return -A * sech(x) * std::tanh(x); }};
}

ProfilePair make_profile(const PotentialParams& p) {
  switch (p.profile) {
    case Profile::sech:
      return sech_profile(p.A);
  }
  throw std::invalid_argument("unsupported profile");
}

namespace {

template <class Eval>
bool pt_check(Eval&& V, std::span<const double> xs, double tol) {
  return std::all_of(xs.begin(), xs.end(),
                     [&](double x) { return std::abs(V(-x) - std::conj(V(x))) <= tol; });
}

}  // namespace

bool check_pt_symmetry(const PotentialParams& p, std::span<const double> sample_points, double tol) {
  return pt_check([&](double x) { return eval_V(x, p); }, sample_points, tol);
}

bool check_pt_symmetry(const ProfilePair& profile, double g, std::span<const double> sample_points,
                       double tol) {
  return pt_check([&](double x) { return eval_V_generic(x, profile, g); }, sample_points, tol);
}

ExactBoundState::ExactBoundState(double g) : g_(g) {
  const double q = 1.0 - 4.0 * g * g;
  A_ = 1.0 / q;
  energy_ = -16.0 * g * g * g * g / (q * q);
  c_ = cplx(2.0 * g, 1.0) / cplx(1.0, 2.0 * g);
}

cplx ExactBoundState::log_psi(double x) const {
  // log|e^x -+ i| = 0.5 log(1 + e^{2x}), written so it never overflows.
  const double log_mod = x > 0.0 ? x + 0.5 * std::log1p(std::exp(-2.0 * x))
                                 : 0.5 * std::log1p(std::exp(2.0 * x));
  // Principal arguments: Arg(e^x - i) = -atan2(1, e^x), Arg(e^x + i) = +atan2(1, e^x).
  const double arg = std::atan2(1.0, std::exp(x));

  // -A Log(e^x - i) + (1 - A) Log(e^x + i)
  const cplx powers{(1.0 - 2.0 * A_) * log_mod, A_ * arg + (1.0 - A_) * arg};

  // 1 - c e^x has integer exponent, so any branch of its logarithm will do.
  const cplx last = x > 0.0 ? x + std::log(std::exp(-x) - c_) : std::log(1.0 - c_ * std::exp(x));

  return (A_ - 1.0) * x + powers + last;
}

cplx ExactBoundState::psi(double x) const { return std::exp(log_psi(x)); }

ExactBoundState exact_bound_state(double g) {
  if (!std::isfinite(g) || g * g >= 0.25) {
    throw std::domain_error("exact bound state requires g^2 < 1/4");
  }
  return ExactBoundState(g);
}

double schrodinger_residual(const std::function<cplx(double)>& psi, cplx E, const PotentialParams& p,
                            std::span<const double> grid, double h) {
  if (grid.size() < 3) throw std::invalid_argument("residual grid needs at least three points");
  if (!(h > 0.0)) throw std::invalid_argument("residual step must be positive");

  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const cplx centre = psi(x);
    scale = std::max(scale, std::abs(centre));
    if (i == 0 || i + 1 == grid.size()) continue;
    const cplx lap = (psi(x + h) - 2.0 * centre + psi(x - h)) / (h * h);
    worst = std::max(worst, std::abs(-lap + (eval_V(x, p) - E) * centre));
  }
  if (scale == 0.0) throw std::invalid_argument("wavefunction vanishes on the residual grid");
  return worst / scale;
}

}  // namespace ssatlas
