#include <doctest.h>

#include <cmath>
#include <complex>

#include "ssatlas/ode.hpp"

using namespace ssatlas;

TEST_CASE("harmonic oscillator over many periods") {
  std::array<double, 2> y{1.0, 0.0};
  const auto st = ode::integrate_dop853(
      [](double, const std::array<double, 2>& u, std::array<double, 2>& du) {
        du[0] = u[1];
        du[1] = -u[0];
      },
      0.0, 20.0 * M_PI, y, {1e-12, 1e-12});
  CHECK(std::abs(y[0] - 1.0) < 1e-9);
  CHECK(std::abs(y[1]) < 1e-9);
  CHECK(st.accepted > 0);
}

TEST_CASE("complex exponential, forward and backward") {
  using C = std::complex<double>;
  const C w(0.3, 2.0);
  std::array<C, 1> y{C(1.0)};
  auto f = [&](double, const std::array<C, 1>& u, std::array<C, 1>& du) { du[0] = w * u[0]; };
  ode::integrate_dop853(f, 0.0, 3.0, y, {1e-12, 1e-14});
  CHECK(std::abs(y[0] - std::exp(3.0 * w)) < 1e-10 * std::abs(std::exp(3.0 * w)));
  ode::integrate_dop853(f, 3.0, 0.0, y, {1e-12, 1e-14});
  CHECK(std::abs(y[0] - 1.0) < 1e-9);
}

TEST_CASE("eighth order: error falls steeply with tolerance") {
  auto run = [](double tol) {
    std::array<double, 1> y{1.0};
    ode::integrate_dop853([](double x, const std::array<double, 1>& u, std::array<double, 1>& du) { du[0] = -2.0 * x * u[0]; },
                          0.0, 2.0, y, {tol, tol});
    return std::abs(y[0] - std::exp(-4.0));
  };
  CHECK(run(1e-6) < 1e-5);
  CHECK(run(1e-11) < 1e-10);
}

TEST_CASE("long double state") {
  std::array<long double, 1> y{1.0L};
  ode::integrate_dop853([](double, const std::array<long double, 1>& u, std::array<long double, 1>& du) { du[0] = u[0]; }, 0.0,
                        1.0, y, {1e-14, 1e-14});
  CHECK(std::abs(static_cast<double>(y[0]) - std::exp(1.0)) < 1e-12);
}

TEST_CASE("step budget exhaustion throws") {
  std::array<double, 1> y{1.0};
  ode::Options opt;
  opt.max_steps = 5;
  opt.max_step = 1e-3;
  CHECK_THROWS_AS(ode::integrate_dop853([](double, const std::array<double, 1>& u, std::array<double, 1>& du) { du[0] = u[0]; },
                                        0.0, 1.0, y, opt),
                  ode::IntegrationError);
}
