#include <doctest.h>

#include <cmath>

#include "ssatlas/ss_atlas.hpp"

using namespace ssatlas;

namespace {

void check_root(const SSRoot& r) {
  CHECK(r.residual < 1e-9 * r.m_norm);
  CHECK(r.m11_abs < 1e-8 * r.m_norm);
  CHECK(r.det_residual < 1e-6);
}

bool same_roots(const std::vector<SSRoot>& a, const std::vector<SSRoot>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].g_star - b[i].g_star) > tol || std::abs(a[i].k_star - b[i].k_star) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("Newton from a nearby seed") {
  const SSRoot r = find_ss(1.5, -0.93, 1.0);
  CHECK(r.g_star == doctest::Approx(-0.9268).epsilon(1e-3));
  CHECK(r.k_star == doctest::Approx(1.018).epsilon(1e-3));
  check_root(r);
  const SSRoot again = find_ss(1.5, -0.9, 1.05);
  CHECK(std::abs(again.g_star - r.g_star) < 1e-7);
}

TEST_CASE("no singularity below A = 1/2") {
  CHECK_THROWS_AS(find_ss(0.3, -0.5, 0.5), NewtonFailure);
  CHECK(scan_ss(0.25, ScanWindow::defaults(0.25)).empty());
}

TEST_CASE("staircase bookkeeping") {
  CHECK(predicted_count(0.25) == 0);
  CHECK(predicted_count(0.75) == 1);
  CHECK(predicted_count(2.0) == 2);
  CHECK(predicted_count(2.5) == 3);
  CHECK_THROWS_AS(predicted_count(-0.1), std::invalid_argument);
  const ScanWindow w = ScanWindow::defaults(1.0);
  CHECK(w.g_lo == -3.0);
  CHECK(w.k_hi == 3.0);
  CHECK(w.contains(-1.0, 1.0));
  CHECK_FALSE(w.contains(0.5, 1.0));
  CHECK_THROWS_AS((ScanWindow{0.0, -1.0, 0.1, 1.0}.validate()), std::invalid_argument);
}

TEST_CASE("atlas at A = 1 and scan completeness") {
  const SSAtlas atlas = count_ss(1.0);
  CHECK(atlas.count == 1);
  CHECK(atlas.predicted_count == 1);
  CHECK_FALSE(atlas.boundary);
  for (const auto& r : atlas.roots) check_root(r);

  ScanOptions fine;
  fine.coarse_n = 128;
  CHECK(same_roots(atlas.roots, scan_ss(1.0, ScanWindow::defaults(1.0), fine), 1e-6));
  CHECK(count_ss(1.5).boundary);
}

TEST_CASE("warm and cold traces agree") {
  const std::vector<double> As = {1.6, 1.7, 1.8};
  const auto warm = trace_gc_curve(As, true);
  const auto cold = trace_gc_curve(As, false);
  REQUIRE(warm.size() == 3);
  for (std::size_t i = 0; i < As.size(); ++i) {
    CHECK(warm[i].A == As[i]);
    CHECK(cold[i].warm_started == 0);
    CHECK(same_roots(warm[i].roots, cold[i].roots, 1e-6));
  }
  CHECK(warm[2].warm_started > 0);
  CHECK(warm[2].roots.size() == 2);
}

TEST_CASE("cross-validation") {
  const CrossValidation none = cross_validate_transition(0.25);
  CHECK_FALSE(none.ss_found);
  CHECK_FALSE(none.transition_found);

  // At L = 25 the box delays the first pair to g ~ -1.35 (the nascent pair
  // sits between two box levels); L = 50 resolves the onset.
  CrossValidationOptions wide;
  wide.grid = {50.0, 4001, Boundary::twisted_periodic, 1e-10};
  wide.onset_grid = {50.0, 1001, Boundary::twisted_periodic, 1e-10};
  const CrossValidation two = cross_validate_transition(2.0, wide);
  REQUIRE(two.ss_found);
  REQUIRE(two.transition_found);
  CHECK(two.dg < 0.01);
  CHECK(two.dk < 0.02);
}
