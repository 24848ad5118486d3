#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ssatlas/potential.hpp"

using namespace ssatlas;

TEST_CASE("closed form matches the generic Wadati construction") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-20, 20), ug(-2, 1), uA(0, 3);
  for (int i = 0; i < 500; ++i) {
    const PotentialParams p{ug(rng), uA(rng), Profile::sech};
    const double x = ux(rng);
    const cplx a = eval_V(x, p);
    const cplx b = eval_V_generic(x, make_profile(p), p.g);
    CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("reference values") {
  const PotentialParams p{-0.5, 2.0, Profile::sech};
  // x = 0: sech = 1, tanh = 0
  CHECK(eval_V(0.0, p).real() == doctest::Approx(-4.0 + 2.0));
  CHECK(eval_V(0.0, p).imag() == doctest::Approx(0.0));
  const double x = 0.7, s = 1.0 / std::cosh(x), t = std::tanh(x);
  CHECK(eval_V(x, p).real() == doctest::Approx(-4.0 * s * s + 2.0 * s).epsilon(1e-14));
  CHECK(eval_V(x, p).imag() == doctest::Approx(2.0 * s * t).epsilon(1e-14));
  CHECK(sech(800.0) == 0.0);
  CHECK(std::isfinite(eval_V(-800.0, p).imag()));
}

TEST_CASE("PT symmetry holds and a broken profile is caught") {
  std::vector<double> xs;
  for (int i = -100; i <= 100; ++i) xs.push_back(0.2 * i);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ug(-2, 1), uA(0, 3);
  for (int i = 0; i < 50; ++i) CHECK(check_pt_symmetry({ug(rng), uA(rng), Profile::sech}, xs, 1e-12));

  ProfilePair odd{[](double x) { return std::tanh(x) / std::cosh(x) + 1.0 / std::cosh(x); },
                  [](double x) { return (1.0 - 2.0 * std::tanh(x) * std::tanh(x)) / std::cosh(x) - std::tanh(x) / std::cosh(x); }};
  CHECK_FALSE(check_pt_symmetry(odd, 0.3, xs, 1e-6));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((PotentialParams{0.0, -1.0, Profile::sech}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((PotentialParams{NAN, 1.0, Profile::sech}.validate()), std::invalid_argument);
  CHECK_NOTHROW((PotentialParams{0.0, 0.0, Profile::sech}.validate()));
  CHECK(profile_from_string("sech") == Profile::sech);
  CHECK_THROWS_AS(profile_from_string("gauss"), std::invalid_argument);
}

TEST_CASE("exact bound state") {
  const double g = -1.0 / (2.0 * std::sqrt(3.0));
  const ExactBoundState es = exact_bound_state(g);
  CHECK(es.A() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(es.energy() == doctest::Approx(-0.25).epsilon(1e-14));
  // E = -(A-1)^2 on the whole curve
  for (double gg : {-0.45, -0.3, -0.1, 0.2, 0.4}) {
    const ExactBoundState e = exact_bound_state(gg);
    CHECK(e.energy() == doctest::Approx(-(e.A() - 1) * (e.A() - 1)).epsilon(1e-12));
    CHECK(e.A() == doctest::Approx(1.0 / (1.0 - 4.0 * gg * gg)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(exact_bound_state(0.5), std::domain_error);
  CHECK_THROWS_AS(exact_bound_state(-0.7), std::domain_error);
  CHECK(exact_bound_state(0.0).marginal());

  // PT: psi(-x) is proportional to conj(psi(x))
  const cplx r = es.psi(-1.3) / std::conj(es.psi(1.3));
  const cplx r2 = es.psi(-4.1) / std::conj(es.psi(4.1));
  CHECK(std::abs(r - r2) < 1e-10 * std::abs(r));

  // decays like e^{-(A-1)|x|}
  const double ratio = std::abs(es.psi(30.0)) / std::abs(es.psi(20.0));
  CHECK(std::log(ratio) / 10.0 == doctest::Approx(-(es.A() - 1.0)).epsilon(1e-6));
  CHECK(std::isfinite(std::abs(es.psi(-700.0))));
}

TEST_CASE("finite-difference residual scales as h^2") {
  const ExactBoundState es = exact_bound_state(-0.35);
  auto residual = [&](double h) {
    std::vector<double> xs;
    for (double x = -15.0; x <= 15.0; x += h) xs.push_back(x);
    return schrodinger_residual([&](double x) { return es.psi(x); }, es.energy(), es.params(), xs, h);
  };
  const double r1 = residual(4e-3), r2 = residual(2e-3);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));

  // a wrong energy leaves an O(1) residual
  std::vector<double> xs;
  for (double x = -10.0; x <= 10.0; x += 1e-2) xs.push_back(x);
  CHECK(schrodinger_residual([&](double x) { return es.psi(x); }, es.energy() + 0.1, es.params(), xs, 1e-2) > 0.05);
  CHECK_THROWS_AS(schrodinger_residual([](double) { return cplx{}; }, 0.0, es.params(), std::vector<double>{0.0, 1.0}, 1.0),
                  std::invalid_argument);
}
