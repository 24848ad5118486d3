#pragma once

// Finite-difference spectrum of -d^2/dx^2 + V(x) on a truncated line and the
// two phase-transition finders built on top of it.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssatlas/potential.hpp"

namespace ssatlas {

// Wall condition of the computational box [-L, L].
//
// twisted_periodic: psi(x + 2L) = i psi(x). For a localized PT-symmetric
//   potential the box quantization reduces to Re(M22(k) e^{-2ikL}) = 0, which
//   has only real roots unless M22 vanishes, so the discretized continuum is a
//   real comb and complex pairs signal genuine symmetry breaking.
// dirichlet: psi(-L) = psi(L) = 0. The quantization then carries M12 + M21,
//   which is purely imaginary for this family, so every low-lying box mode
//   picks up an O(1/L) imaginary part. Kept for comparison.
enum class Boundary { twisted_periodic, dirichlet };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

struct GridSpec {
  double half_width = 25.0;  // L
  int n_points = 2001;       // nodes on [-L, L] including both ends
  Boundary boundary = Boundary::twisted_periodic;
  double truncation_tol = 1e-10;  // sech(L) must fall below this

  double spacing() const { return 2.0 * half_width / (n_points - 1); }
  // Number of unknowns: n-1 for the twisted ring (the node at +L is the image
  // of the node at -L), n-2 for Dirichlet (both end nodes are pinned).
  std::size_t unknowns() const;
  // Abscissae of the unknowns, ascending.
  std::vector<double> nodes() const;
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

class EigenFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TransitionNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tridiagonal operator with, for the twisted ring, two corner couplings.
struct LatticeHamiltonian {
  std::vector<cplx> diagonal;  // 2/h^2 + V(x_j)
  std::vector<double> x;       // node positions
  double hopping = 0.0;        // -1/h^2
  double h = 0.0;
  Boundary boundary = Boundary::twisted_periodic;
  cplx corner_upper{};  // H(0, N-1)
  cplx corner_lower{};  // H(N-1, 0)
  bool coarse = false;  // h^2 max|V| > 1: the grid under-resolves the potential

  std::size_t size() const { return diagonal.size(); }
  cplx operator()(std::size_t row, std::size_t col) const;
  std::vector<cplx> apply(std::span<const cplx> v) const;
};

LatticeHamiltonian build_hamiltonian(const PotentialParams& p, const GridSpec& grid);

// Every eigenvalue of a lattice Hamiltonian, unordered. Roots of the lattice
// characteristic function are polished simultaneously by Aberth-Ehrlich
// iteration, starting from `initial_guess` when it has the right size and from
// the free-lattice spectrum otherwise. Throws EigenFailure on non-convergence.
std::vector<cplx> lattice_eigenvalues(const LatticeHamiltonian& H,
                                      std::span<const cplx> initial_guess = {});

// Eigenvector for a known eigenvalue by inverse iteration, normalized to unit 2-norm.
std::vector<cplx> lattice_eigenvector(const LatticeHamiltonian& H, cplx eigenvalue);

// Inverse participation ratio sum|psi|^4 / (sum|psi|^2)^2.
double inverse_participation_ratio(std::span<const cplx> psi);

struct SpectrumResult {
  std::vector<cplx> eigenvalues;  // sorted by (Re E, Im E)
  std::vector<double> ipr;        // per eigenvalue
  PotentialParams params;
  GridSpec grid;
  bool coarse_grid = false;
};

// Detection knobs shared by the classifier, the sweep and the transition finders.
struct DetectionOptions {
  double im_threshold = 1e-4;
  double ipr_factor = 5.0;  // bound states need IPR > ipr_factor * median IPR
  // Only eigenvalues with Re E below window_fraction * (4/h^2) are physical;
  // near the top of the lattice band the staggered modes feel an inverted
  // potential and produce complex pairs of their own.
  double window_fraction = 0.25;

  bool operator==(const DetectionOptions&) const = default;
};

double physical_energy_cutoff(const GridSpec& grid, const DetectionOptions& opt);

SpectrumResult compute_spectrum(const PotentialParams& p, const GridSpec& grid,
                                const SpectrumResult* warm_start = nullptr);

struct StateClasses {
  std::vector<std::size_t> continuum;
  std::vector<std::size_t> complex_pair;
  std::vector<std::size_t> bound;
};

StateClasses classify_states(const SpectrumResult& s, const DetectionOptions& opt = {});

// Largest |Im E| among physical eigenvalues.
double max_imaginary_part(const SpectrumResult& s, const DetectionOptions& opt = {});
bool has_complex_pair(const SpectrumResult& s, const DetectionOptions& opt = {});
// The physical eigenvalue with the largest positive imaginary part, if any exceeds the threshold.
std::optional<cplx> leading_pair(const SpectrumResult& s, const DetectionOptions& opt = {});

enum class TransitionKind { bifurcation, collision };
std::string to_string(TransitionKind kind);

struct TransitionPoint {
  double g_c = 0.0;
  TransitionKind kind = TransitionKind::bifurcation;
  cplx E_c{};
  double k_c = 0.0;
  double A = 0.0;
  double bracket_width = 0.0;
  int spectra_evaluated = 0;
};

// Bisection on "a complex pair is present" between g_lo and g_hi; the pair
// must be absent at one end and present at the other. E_c is the nascent
// pair read on the broken side of the final bracket, k_c = sqrt(Re E_c).
TransitionPoint find_bifurcation_g(double A, double g_lo, double g_hi, const GridSpec& grid,
                                   double tol_g = 1e-3, const DetectionOptions& opt = {});

// Same indicator, but the unbroken end must hold a bound state (the pair has
// collided at the bottom of the continuum). k_c is 0 by definition.
TransitionPoint find_collision_g(double A, double g_lo, double g_hi, const GridSpec& grid,
                                 double tol_g = 1e-3, const DetectionOptions& opt = {});

struct SweepSummary {
  double g = 0.0;
  double max_im = 0.0;
  double pair_re = 0.0;  // Re E of the leading pair, 0 when absent
  double pair_im = 0.0;
  int n_pairs = 0;       // conjugate pairs in the physical window
  int n_bound = 0;
  double ground_re = 0.0;  // lowest Re E
};

SweepSummary summarize(const SpectrumResult& s, const DetectionOptions& opt = {});

// One spectrum per g, in input order. Points are processed in fixed-size
// blocks that warm-start from their predecessor, so the output does not
// depend on the thread count.
std::vector<SpectrumResult> spectrum_sweep(double A, std::span<const double> g_values,
                                           const GridSpec& grid, int threads = 1);

}  // namespace ssatlas
