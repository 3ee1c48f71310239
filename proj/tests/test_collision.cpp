#include <random>

#include "doctest.h"
#include "kgap/collision.hpp"

using namespace kgap;

namespace {

// mu times a random polynomial of degree <= 2 plus a shifted bump.
Eigen::VectorXd smooth_field(const VelocityGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  double c[10];
  for (double& x : c) x = U(rng);
  Eigen::VectorXd mu = maxwellian_values(g), f(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    Vec3 v = g.node(p);
    double poly = 1 + c[0] * v[0] + c[1] * v[1] + c[2] * v[2] + 0.2 * c[3] * v[0] * v[1] +
                  0.2 * c[4] * (v[2] * v[2] - 1) + 0.2 * c[5] * v[0] * v[2];
    Vec3 w{v[0] - c[6], v[1] - c[7], v[2] - c[8]};
    f[p] = mu[p] * poly + 0.3 * std::exp(-0.6 * norm2(w)) * 0.06;
  }
  return f;
}

}  // namespace

TEST_CASE("maxwellian") {
  auto g = build_grid(8.0, 16);
  Eigen::VectorXd mu = maxwellian_values(g);
  CHECK(mu.maxCoeff() < std::pow(2 * kPi, -1.5));
  auto g2 = build_grid(4.0, 9 + 1);
  (void)g2;
  double mass = mu.sum() * g.cell();
  // Poisson summation for the cell-centred lattice with h = 1:
  // sum_j h g(x_j) = sum_m ghat(2 pi m / h) (-1)^m.
  double a = 1;
  for (int m = 1; m < 4; ++m) a += 2 * std::pow(-1.0, m) * std::exp(-2 * kPi * kPi * m * m);
  CHECK(std::abs(mass - a * a * a) < 1e-12);
  CHECK(std::abs(mass - 1) < 1e-7);
  double m2 = 0;
  for (std::size_t p = 0; p < g.size(); ++p) m2 += norm2(g.node(p)) * mu[p];
  CHECK(std::abs(m2 * g.cell() - 3) < 1e-6);
  auto odd = build_grid(3.0, 6);
  Eigen::VectorXd mo = maxwellian_values(odd);
  CHECK(mo.size() == 216);
}

TEST_CASE("q_direct equilibrium, conservation, bilinearity") {
  auto g = build_grid(5.0, 10);
  KernelParams kp;
  auto aq = build_angular(kp, 8, 8);
  Eigen::VectorXd mu = maxwellian_values(g);
  CollisionOptions raw;
  raw.conservative = false;
  Eigen::VectorXd q0 = q_direct_real(g, mu, mu, kp, aq, raw);
  CHECK(q0.cwiseAbs().maxCoeff() < 1e-11 * mu.maxCoeff());

  Eigen::VectorXd f = smooth_field(g, 1), h = smooth_field(g, 2);
  Eigen::VectorXd q = q_direct_real(g, f, f, kp, aq);
  Eigen::VectorXd m = g.cell() * (invariants(g).transpose() * q);
  CHECK(m.cwiseAbs().maxCoeff() < 1e-8 * f.squaredNorm() * g.cell());
  Eigen::VectorXd qr = q_direct_real(g, f, f, kp, aq, raw);
  Eigen::VectorXd mr = g.cell() * (invariants(g).transpose() * qr);
  MESSAGE("raw moment defect " << mr.cwiseAbs().maxCoeff() << " vs |Q| " << qr.norm());

  Eigen::VectorXd a = q_direct_real(g, f, 2.5 * h, kp, aq);
  Eigen::VectorXd b = q_direct_real(g, f, h, kp, aq);
  CHECK((a - 2.5 * b).norm() < 1e-12 * a.norm());
  Eigen::VectorXd c = q_direct_real(g, f + h, h, kp, aq);
  Eigen::VectorXd d = q_direct_real(g, f, h, kp, aq) + q_direct_real(g, h, h, kp, aq);
  CHECK((c - d).norm() < 1e-12 * c.norm());
}

TEST_CASE("q_direct complex modes reduce to real") {
  auto g = build_grid(4.0, 8);
  KernelParams kp;
  auto aq = build_angular(kp, 4, 4);
  Eigen::VectorXd f = smooth_field(g, 4), h = smooth_field(g, 5);
  Eigen::VectorXd r = q_direct_real(g, f, h, kp, aq);
  Eigen::VectorXcd z = q_direct_complex(g, cd(0, 1) * f.cast<cd>(), h.cast<cd>(), kp, aq);
  CHECK((z - cd(0, 1) * r.cast<cd>()).norm() < 1e-13 * r.norm());

  DistributionField F(g), G(g);
  F[{1, 0, 0}] = cd(0.5, 0.2) * f.cast<cd>();
  F[{-1, 0, 0}] = cd(0.5, -0.2) * f.cast<cd>();
  G[{0, 0, 0}] = h.cast<cd>();
  auto Q = q_direct(F, G, kp, aq);
  CHECK(Q.reality_defect() < 1e-13);
  CHECK((Q.get({1, 0, 0}) - cd(0.5, 0.2) * r.cast<cd>()).norm() < 1e-12 * r.norm());
}

TEST_CASE("q_split partition") {
  auto g = build_grid(5.0, 10);
  KernelParams kp;
  auto aq = build_angular(kp, 8, 4);
  auto F = DistributionField::homogeneous(g, smooth_field(g, 7));
  auto G = DistributionField::homogeneous(g, smooth_field(g, 8));
  SplitParams sp{1.5};
  auto [qr, qb] = q_split(F, G, kp, sp, aq);
  auto q = q_direct(F, G, kp, aq);
  CHECK((qr.zero_mode() + qb.zero_mode() - q.zero_mode()).norm() < 1e-12 * q.zero_mode().norm());
  SplitParams big{100.0};
  auto [r2, b2] = q_split(F, G, kp, big, aq);
  CHECK(b2.zero_mode().cwiseAbs().maxCoeff() == 0.0);
  CHECK((r2.zero_mode() - q.zero_mode()).norm() < 1e-12 * q.zero_mode().norm());
}

TEST_CASE("theta_min convergence of q_direct") {
  // Truncating at theta_min drops a piece of size ~ theta_min^(2-2s), so successive
  // halvings must shrink the change by about 2^(2-2s).
  auto g = build_grid(6.0, 12);
  Eigen::VectorXd mu = maxwellian_values(g), f(g.size()), h(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    Vec3 v = g.node(p);
    f[p] = mu[p] * (1 + 0.3 * v[0] + 0.1 * (v[1] * v[1] - 1));
    h[p] = mu[p] * (1 - 0.2 * v[2] + 0.1 * v[0] * v[1]);
  }
  for (double s : {0.5, 0.7}) {
    KernelParams kp;
    kp.s = s;
    std::vector<Eigen::VectorXd> q;
    for (double tm : {4e-3, 2e-3, 1e-3}) {
      kp.theta_min = tm;
      q.push_back(q_direct_real(g, f, h, kp, build_angular(kp, 16, 8)));
    }
    double d1 = (q[0] - q[1]).norm(), d2 = (q[1] - q[2]).norm();
    double rate = std::log2(d1 / d2);
    MESSAGE("s=" << s << " change " << d2 / q[2].norm() << " rate " << rate);
    CHECK(rate == doctest::Approx(2 - 2 * s).epsilon(0.15));
  }
}
