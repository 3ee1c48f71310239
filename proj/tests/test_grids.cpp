#include <random>

#include "doctest.h"
#include "kgap/grids.hpp"

using namespace kgap;

TEST_CASE("grid geometry") {
  auto g = build_grid(8.0, 16);
  CHECK(g.h() == doctest::Approx(1.0));
  CHECK(g.size() == 4096);
  CHECK_THROWS_AS(build_grid(8.0, 15), InvalidArgument);
  CHECK_THROWS_AS(build_grid(-1.0, 16), InvalidArgument);

  auto s = build_grid(4.0, 8);
  for (int i = 0; i < 8; ++i) CHECK(s.x(i) == -s.x(7 - i));
  CHECK(s.h() * s.n() == doctest::Approx(8.0));
}

TEST_CASE("dft round trip and gaussian transform") {
  auto g = build_grid(6.0, 12);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<cd> f(g.size());
  for (auto& x : f) x = cd(nd(rng), nd(rng));
  auto back = g.inverse(g.forward(f));
  double err = 0, nrm = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    err = std::max(err, std::abs(back[i] - f[i]));
    nrm = std::max(nrm, std::abs(f[i]));
  }
  CHECK(err / nrm < 1e-12);

  auto G = build_grid(8.0, 32);
  std::vector<cd> mu(G.size());
  for (std::size_t p = 0; p < G.size(); ++p)
    mu[p] = std::pow(2 * kPi, -1.5) * std::exp(-0.5 * norm2(G.node(p)));
  auto mh = G.forward(mu);
  double worst = 0;
  for (int a = 8; a < 24; ++a)
    for (int b = 8; b < 24; ++b)
      for (int c = 8; c < 24; ++c) {
        double x2 = G.xi(a) * G.xi(a) + G.xi(b) * G.xi(b) + G.xi(c) * G.xi(c);
        worst = std::max(worst, std::abs(mh[G.idx(a, b, c)] - std::exp(-0.5 * x2)));
      }
  CHECK(worst < 1e-12);
}

static double calibration(const AngularQuadrature& aq) {
  double s = 0;
  for (std::size_t i = 0; i < aq.n_theta(); ++i) s += aq.w_theta[i] * aq.theta[i] * aq.theta[i];
  return s * aq.w_phi * aq.n_phi();
}

TEST_CASE("angular calibration") {
  for (double s : {0.2, 0.5, 0.8}) {
    KernelParams kp;
    kp.s = s;
    kp.theta_min = 1e-3;
    auto aq = build_angular(kp, 16, 8);
    double p = 2 - 2 * s;
    double exact = 2 * kPi * (std::pow(kPi / 2, p) - std::pow(1e-3, p)) / p;
    CHECK(std::abs(calibration(aq) / exact - 1) < 1e-8);
    auto fine = build_angular(kp, 32, 8);
    CHECK(std::abs(calibration(fine) / calibration(aq) - 1) < 1e-10);
    for (std::size_t i = 0; i < aq.n_theta(); ++i) {
      CHECK(aq.w_theta[i] > 0);
      CHECK(aq.theta[i] >= kp.theta_min);
      CHECK(aq.theta[i] <= kPi / 2);
    }
  }
  KernelParams kp;
  kp.theta_min = 1e-3;
  double exact = 2 * kPi * (kPi / 2 - 1e-3);
  CHECK(std::abs(calibration(build_angular(kp, 12, 4)) / exact - 1) < 1e-8);
  CHECK_THROWS_AS(build_angular(kp, 8, 5), InvalidArgument);
  kp.theta_min = 0;
  CHECK_THROWS_AS(build_angular(kp, 8, 4), InvalidArgument);
}

TEST_CASE("antipodal pairing kills azimuthal integrands") {
  KernelParams kp;
  auto aq = build_angular(kp, 8, 6);
  Frame fr = make_frame(Vec3{0.3, -0.5, std::sqrt(1 - 0.34)});
  for (std::size_t it = 0; it < aq.n_theta(); ++it) {
    double acc[3] = {0, 0, 0};
    for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
      Vec3 sg = aq.sigma(fr, it, ip);
      for (int d = 0; d < 3; ++d) acc[d] += sg[d] - std::cos(aq.theta[it]) * fr.u[d];
    }
    for (double a : acc) CHECK(std::abs(a) < 1e-14);
  }
  // Frame of -u is (-u, e1, -e2).
  Frame fm = make_frame(Vec3{-0.3, 0.5, -std::sqrt(1 - 0.34)});
  for (int d = 0; d < 3; ++d) {
    CHECK(fm.e1[d] == fr.e1[d]);
    CHECK(fm.e2[d] == -fr.e2[d]);
  }
}

TEST_CASE("grazing integral grows as theta_min decreases") {
  double prev = 0;
  for (double tm : {0.1, 0.03, 0.01, 0.003, 0.001}) {
    KernelParams kp;
    kp.s = 0.7;
    kp.theta_min = tm;
    auto aq = build_angular(kp, 16, 4);
    double v = 0;
    for (std::size_t i = 0; i < aq.n_theta(); ++i)
      v += aq.w_theta[i] * std::pow(std::sin(aq.theta[i] / 2), 2);
    v *= 2 * kPi;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("torus modes closed under negation") {
  auto tm = build_modes(1);
  CHECK(tm.modes.size() == 27);
  for (auto l : tm.modes) CHECK(tm.contains(Mode{-l[0], -l[1], -l[2]}));
}
