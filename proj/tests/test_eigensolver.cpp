#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles/dense_spectrum.hpp"
#include "ssatlas/eigensolver.hpp"

using namespace ssatlas;

namespace {

GridSpec small_grid(int n, Boundary b = Boundary::twisted_periodic) { return {25.0, n, b, 1e-10}; }

// Largest distance from an eigenvalue of `a` to its nearest neighbour in `b`.
double max_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (cplx x : a) {
    double best = 1e300;
    for (cplx y : b) best = std::min(best, std::abs(x - y));
    m = std::max(m, best);
  }
  return m;
}

}  // namespace

TEST_CASE("grid bookkeeping") {
  const GridSpec g = small_grid(11);
  CHECK(g.spacing() == doctest::Approx(5.0));
  CHECK(g.unknowns() == 10);
  CHECK(g.nodes().front() == -25.0);
  CHECK(g.nodes().back() == doctest::Approx(20.0));
  const GridSpec d = small_grid(11, Boundary::dirichlet);
  CHECK(d.unknowns() == 9);
  CHECK(d.nodes().front() == doctest::Approx(-20.0));
  CHECK_THROWS_AS(small_grid(2).validate(), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{5.0, 101, Boundary::twisted_periodic, 1e-10}.validate()), std::invalid_argument);
  CHECK(boundary_from_string(to_string(Boundary::dirichlet)) == Boundary::dirichlet);
}

TEST_CASE("matrix entries agree with the dense assembly") {
  const PotentialParams p{-0.6, 1.5, Profile::sech};
  for (Boundary b : {Boundary::twisted_periodic, Boundary::dirichlet}) {
    const LatticeHamiltonian H = build_hamiltonian(p, small_grid(41, b));
    const auto D = oracle::dense_hamiltonian(p.g, p.A, 25.0, 41, b == Boundary::twisted_periodic);
    REQUIRE(static_cast<long>(H.size()) == D.rows());
    for (std::size_t i = 0; i < H.size(); ++i)
      for (std::size_t j = 0; j < H.size(); ++j) CHECK(std::abs(H(i, j) - D(i, j)) < 1e-12);
  }
}

TEST_CASE("eigenvalues agree with dense QR") {
  for (Boundary b : {Boundary::twisted_periodic, Boundary::dirichlet}) {
    for (double g : {-1.0, -0.6, -0.289, 0.4}) {
      const SpectrumResult s = compute_spectrum({g, 1.5, Profile::sech}, small_grid(301, b));
      const auto ref = oracle::dense_eigenvalues(g, 1.5, 25.0, 301, b == Boundary::twisted_periodic);
      CHECK(max_distance(s.eigenvalues, ref) < 1e-9);
    }
  }
}

TEST_CASE("free lattice spectrum") {
  const GridSpec grid = small_grid(201);
  const SpectrumResult s = compute_spectrum({0.3, 0.0, Profile::sech}, grid);
  const std::size_t N = grid.unknowns();
  const double h = grid.spacing();
  std::vector<cplx> exact;
  for (std::size_t m = 0; m < N; ++m) {
    const double theta = (0.5 * std::numbers::pi + 2.0 * std::numbers::pi * m) / N;
    exact.push_back((2.0 - 2.0 * std::cos(theta)) / (h * h));
  }
  std::sort(exact.begin(), exact.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i < N; ++i) CHECK(std::abs(s.eigenvalues[i] - exact[i]) <= 1e-10 * std::abs(exact[i]));
}

TEST_CASE("spectrum closed under conjugation") {
  const SpectrumResult s = compute_spectrum({-0.6, 1.5, Profile::sech}, small_grid(401));
  double radius = 0.0;
  for (cplx e : s.eigenvalues) radius = std::max(radius, std::abs(e));
  for (cplx e : s.eigenvalues) {
    double best = 1e300;
    for (cplx f : s.eigenvalues) best = std::min(best, std::abs(std::conj(e) - f));
    CHECK(best <= 1e-6 * radius);
  }
}

TEST_CASE("eigenvectors and IPR") {
  const PotentialParams p{-1.0 / (2.0 * std::sqrt(3.0)), 1.5, Profile::sech};
  const GridSpec grid = small_grid(501);
  const LatticeHamiltonian H = build_hamiltonian(p, grid);
  const SpectrumResult s = compute_spectrum(p, grid);
  const cplx e = s.eigenvalues.front();
  CHECK(e.real() == doctest::Approx(-0.25).epsilon(0.02));
  const auto v = lattice_eigenvector(H, e);
  const auto Hv = H.apply(v);
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r = std::max(r, std::abs(Hv[i] - e * v[i]));
  CHECK(r < 1e-8);

  std::vector<cplx> delta(100), flat(100, cplx(0.1));
  delta[7] = 3.0;
  CHECK(inverse_participation_ratio(delta) == doctest::Approx(1.0));
  CHECK(inverse_participation_ratio(flat) == doctest::Approx(0.01));
}

TEST_CASE("classification across the two transitions") {
  const GridSpec grid = small_grid(801);
  const SpectrumResult unbroken = compute_spectrum({-1.0, 1.5, Profile::sech}, grid);
  CHECK_FALSE(has_complex_pair(unbroken));
  CHECK(classify_states(unbroken).bound.empty());

  const SpectrumResult broken = compute_spectrum({-0.6, 1.5, Profile::sech}, grid);
  CHECK(has_complex_pair(broken));
  const auto pair = leading_pair(broken);
  REQUIRE(pair);
  CHECK(pair->imag() > 0.0);
  CHECK(classify_states(broken).complex_pair.size() == 2);

  const SpectrumResult bound = compute_spectrum({-0.2887, 1.5, Profile::sech}, grid);
  const StateClasses c = classify_states(bound);
  REQUIRE(c.bound.size() == 1);
  CHECK(bound.eigenvalues[c.bound[0]].real() < 0.0);
  const SweepSummary sum = summarize(bound);
  CHECK(sum.n_bound == 1);
  CHECK(sum.n_pairs == 0);
}

TEST_CASE("conjugate partners are ordered Im < 0 first") {
  const SpectrumResult s = compute_spectrum({-0.6, 1.5, Profile::sech}, small_grid(301, Boundary::dirichlet));
  for (std::size_t i = 0; i + 1 < s.eigenvalues.size(); ++i) {
    const cplx a = s.eigenvalues[i], b = s.eigenvalues[i + 1];
    if (std::abs(a.imag()) > 1e-6 && std::abs(a - std::conj(b)) < 1e-9) CHECK(a.imag() < 0.0);
  }
}

TEST_CASE("warm start reproduces the cold spectrum") {
  const GridSpec grid = small_grid(401);
  const SpectrumResult a = compute_spectrum({-0.61, 1.5, Profile::sech}, grid);
  const SpectrumResult cold = compute_spectrum({-0.6, 1.5, Profile::sech}, grid);
  const SpectrumResult warm = compute_spectrum({-0.6, 1.5, Profile::sech}, grid, &a);
  CHECK(max_distance(cold.eigenvalues, warm.eigenvalues) < 1e-9);
}

TEST_CASE("sweep does not depend on the thread count") {
  const std::vector<double> gs = {-1.0, -0.9, -0.8, -0.7, -0.6, -0.5, -0.4, -0.3, -0.2, -0.1};
  const auto one = spectrum_sweep(1.5, gs, small_grid(201), 1);
  const auto three = spectrum_sweep(1.5, gs, small_grid(201), 3);
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].eigenvalues == three[i].eigenvalues);
}

TEST_CASE("transition finders") {
  const GridSpec grid = small_grid(801);
  const TransitionPoint b = find_bifurcation_g(1.5, -1.0, -0.8, grid, 2e-3);
  CHECK(b.kind == TransitionKind::bifurcation);
  CHECK(b.g_c > -0.94);
  CHECK(b.g_c < -0.91);
  CHECK(b.k_c == doctest::Approx(std::sqrt(b.E_c.real())));

  CHECK_THROWS_AS(find_bifurcation_g(1.5, -1.2, -1.0, grid), TransitionNotFound);
  CHECK_THROWS_AS(find_bifurcation_g(0.3, -2.0, 0.0, small_grid(301)), TransitionNotFound);
  // no bound state on either side of this bracket
  CHECK_THROWS_AS(find_collision_g(1.5, -1.0, -0.8, grid), TransitionNotFound);
}
