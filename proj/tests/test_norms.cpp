#include "doctest.h"
#include "kgap/norms.hpp"

using namespace kgap;

TEST_CASE("weighted sobolev reduces to L2") {
  auto g = build_grid(5.0, 10);
  Eigen::VectorXcd mu = maxwellian_values(g).cast<cd>();
  CHECK(weighted_sobolev(g, mu, {0.0, 0.0}) == doctest::Approx(l2(g, mu)).epsilon(1e-12));
  CHECK(weighted_sobolev(g, mu, {1.0, 0.0}) > l2(g, mu));
  CHECK(weighted_sobolev(g, mu, {-1.0, 0.0}) < l2(g, mu));
  CHECK(weighted_sobolev(g, mu, {0.0, 2.0}) > l2(g, mu));
}

TEST_CASE("J1 vanishes on constants and on mu-modulated constants") {
  KernelParams kp;
  auto g = build_grid(4.0, 6);
  auto aq = build_angular(kp, 6, 8);
  Eigen::VectorXcd one = Eigen::VectorXcd::Ones(g.size());
  CHECK(j1_functional(g, one, kp, aq) < 1e-20);
  Eigen::VectorXcd f = maxwellian_values(g).cast<cd>();
  CHECK(j1_functional(g, f, kp, aq) > 0.0);
}

TEST_CASE("c0 with F = mu equals J1 for Maxwell molecules") {
  KernelParams kp;
  auto g = build_grid(4.0, 6);
  auto aq = build_angular(kp, 6, 8);
  Eigen::VectorXcd f(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) f[p] = std::exp(-0.3 * norm2(g.node(p)));
  double a = j1_functional(g, f, kp, aq, KineticFactor::Maxwell);
  double b = c0_functional(g, maxwellian_values(g), f, aq);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("Gagliardo seminorm sits between multiplier bounds") {
  auto g = build_grid(4.0, 8);
  Eigen::VectorXd h(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) h[p] = std::exp(-norm2(g.node(p)));
  double s = 0.5;
  double gs = gagliardo_seminorm2(g, h, s);
  CHECK(gs > 0.0);
  double l = l2(g, h.cast<cd>());
  double hs = weighted_sobolev(g, h.cast<cd>(), {s, 0.0});
  CHECK(hs_norm2_gagliardo(g, h, s) == doctest::Approx(l * l + gs).epsilon(1e-12));
  CHECK(gs <= 10 * hs * hs);
}

TEST_CASE("positive and negative parts") {
  Eigen::VectorXd h(4);
  h << 1.0, -2.0, 0.0, 3.0;
  auto [p, n] = pos_neg_parts(h);
  CHECK((p + n - h).norm() == 0.0);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(n.maxCoeff() <= 0.0);
}
