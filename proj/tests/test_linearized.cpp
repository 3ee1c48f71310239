#include "doctest.h"
#include "kgap/linearized.hpp"

using namespace kgap;

namespace {

struct Setup {
  VelocityGrid g = build_grid(4.0, 6);
  KernelParams kp;
  AngularQuadrature aq;
  Setup() { aq = build_angular(kp, 6, 8); }
};

}  // namespace

TEST_CASE("weak L is symmetric with a five dimensional null space") {
  Setup s;
  auto op = assemble_L(s.g, s.kp, s.aq);
  CHECK(hermitian_defect(op.a) < 1e-13);
  auto sp = spectrum(s.g, op);
  CHECK(sp.cluster_dim == 5);
  CHECK(sp.residual < 1e-9);
  CHECK(sp.gap > 0.0);
  CHECK(sp.principal_angle < 1e-6);
  for (Eigen::Index i = 0; i < sp.values.size(); ++i) CHECK(sp.values[i].real() < 1e-8);
}

TEST_CASE("weight conventions share the spectrum") {
  Setup s;
  auto a = spectrum(s.g, assemble_L(s.g, s.kp, s.aq), false);
  auto b = spectrum(s.g, assemble_L(s.g, s.kp, s.aq, WeightTag::Polynomial, 4.0), false);
  auto c = spectrum(s.g, assemble_L(s.g, s.kp, s.aq, WeightTag::Unweighted), false);
  CHECK(b.gap == doctest::Approx(a.gap).epsilon(1e-8));
  CHECK(c.gap == doctest::Approx(a.gap).epsilon(1e-8));
}

TEST_CASE("matrix-free apply agrees with the dense matrix") {
  Setup s;
  auto op = assemble_L(s.g, s.kp, s.aq, WeightTag::Unweighted);
  Eigen::VectorXcd f(s.g.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = cd(std::sin(0.7 * i), std::cos(0.3 * i));
  Eigen::VectorXcd a = op.a * f, b = apply_L(s.g, s.kp, s.aq, f);
  CHECK((a - b).norm() <= 1e-10 * a.norm());
}

TEST_CASE("transport makes the mode operator non-Hermitian with the same real part") {
  Setup s;
  auto op0 = assemble_L(s.g, s.kp, s.aq);
  auto op1 = assemble_L(s.g, s.kp, s.aq, WeightTag::Gaussian, 0.0, Mode{1, 0, 0});
  Eigen::MatrixXcd d = op1.a - op0.a;
  CHECK(d.real().norm() < 1e-12);
  CHECK(d.imag().diagonal().norm() > 0.0);
  auto sp = spectrum(s.g, op1, false);
  CHECK(sp.values[0].real() < 1e-8);
}

TEST_CASE("decompositions reconstruct L") {
  Setup s;
  DecompositionParams dp;
  dp.delta = 0.2;
  dp.eps = 0.3;
  auto d = decompose_gaussian(s.g, s.kp, s.aq, dp);
  CHECK(d.reconstruction_defect < 1e-12);
  auto p = decompose_polynomial(s.g, s.kp, s.aq, dp);
  CHECK(p.reconstruction_defect < 1e-12);
  DecompositionParams bad;
  bad.delta = 2.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("assembly refuses oversized grids") {
  Setup s;
  AssemblyOptions opt;
  opt.max_n = 4;
  CHECK_THROWS_AS(assemble_L(s.g, s.kp, s.aq, WeightTag::Gaussian, 0.0, {0, 0, 0}, opt),
                  BudgetExceeded);
}
