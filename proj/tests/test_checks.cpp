#include <limits>

#include "doctest.h"
#include "kgap/checks.hpp"

using namespace kgap;

TEST_CASE("sphere average matches direct quadrature") {
  GaussianBump b;
  b.center = {0.4, -0.2, 0.1};
  b.var = 0.8;
  Vec3 p{0.1, 0.3, -0.5};
  double rho = 0.9;
  // Product rule on the sphere.
  std::vector<double> x, w;
  gauss_legendre(40, -1.0, 1.0, x, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < 80; ++k) {
      double ph = 2 * kPi * k / 80, st = std::sqrt(1 - x[i] * x[i]);
      Vec3 q{p[0] + rho * st * std::cos(ph), p[1] + rho * st * std::sin(ph), p[2] + rho * x[i]};
      acc += w[i] * (2 * kPi / 80) * b(q);
    }
  CHECK(b.sphere(p, rho) == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("cancellation and change of variables") {
  KernelParams kp;
  auto g = build_grid(4.0, 6);
  auto aq = build_angular(kp, 8, 8);
  GaussianBump b;
  b.center = {0.5, 0.0, -0.3};
  b.var = 0.75;
  CHECK(cancellation_check(g, maxwellian_values(g), b, kp, aq).pass);

  GaussianBump c;
  c.var = std::numeric_limits<double>::infinity();
  auto rc = cancellation_check(g, maxwellian_values(g), c, kp, aq);
  CHECK(rc.stats["direct"] == 0.0);

  GaussianBump F;
  F.center = {0.3, 0.2, 0.0};
  CHECK(change_of_variables_check(F, {0.1, -0.4, 0.2}, kp, aq, false, 1e-4).pass);
  KernelParams k2 = kp;
  k2.theta_min = 0.2;
  CHECK(change_of_variables_check(F, {0.1, -0.4, 0.2}, k2, build_angular(k2, 8, 8), true, 1e-6)
            .pass);
}

TEST_CASE("J1 Fourier identity") {
  KernelParams kp;
  auto g = build_grid(5.0, 8);
  auto aq = build_angular(kp, 6, 8);
  GaussianBump b;
  b.center = {0.5, 0.0, -0.3};
  b.var = 0.75;
  auto r = j1_fourier_identity(g, b, aq);
  CHECK(r.pass);
}
