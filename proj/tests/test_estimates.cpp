#include "doctest.h"

#include <cmath>

#include "kgap/estimates.hpp"

using namespace kgap;

namespace {
const EstimateReport& by_name(const std::vector<EstimateReport>& rs, const std::string& n) {
  for (const auto& r : rs)
    if (r.name == n) return r;
  FAIL("missing report " << n);
  return rs.front();
}
}  // namespace

TEST_CASE("identity collision leaves the weight unchanged") {
  std::mt19937_64 rng(3);
  CollisionSample c = random_collision(rng);
  c.theta = 0.0;
  const Vec3 u{c.v[0] - c.vs[0], c.v[1] - c.vs[1], c.v[2] - c.vs[2]};
  const double r = std::sqrt(norm2(u));
  c.sigma = {u[0] / r, u[1] / r, u[2] / r};
  const Vec3 vp = c.vp();
  for (int i = 0; i < 3; ++i) CHECK(vp[i] == doctest::Approx(c.v[i]).epsilon(1e-14));
}

TEST_CASE("weight expansion reconstructs and fits a finite remainder constant") {
  for (double k : {4.0, 6.0}) {
    const auto r = verify_weight_expansion(k, Sampling{7, 2000});
    CHECK(r.pass);
    CHECK(r.stats.at("max_rel_reconstruction") < 1e-12);
    CHECK(std::isfinite(r.stats.at("remainder_ratio_max")));
  }
  CHECK_THROWS_AS(verify_weight_expansion(3.0, Sampling{}), InvalidArgument);
}

TEST_CASE("convex inequality and the weight difference bound hold verbatim") {
  const auto cv = verify_convex_inequality({2.0, 5.0, 9.0}, 0.5, Sampling{7, 10000});
  CHECK(cv.pass);
  CHECK(cv.stats.at("violations") == 0.0);
  const auto wd = verify_weight_diff_bound(6.0, 0.5, Sampling{7, 10000});
  CHECK(wd.pass);
  CHECK(weight_diff_constant(6.0, 0.5) > 0.0);
}

TEST_CASE("ukai integrals") {
  CHECK(ukai_constant(1.0) == doctest::Approx(0.125));
  // eta = 0: the integral is t |xi|^alpha.
  const Vec3 xi{1.0, -2.0, 0.5}, zero{0.0, 0.0, 0.0};
  const double a = 1.5, t = 0.7;
  CHECK(ukai_integral(xi, zero, t, a, UkaiIntegrand::Abs) ==
        doctest::Approx(t * std::pow(norm2(xi), a / 2)).epsilon(1e-12));
  const auto rs = verify_ukai({0.5, 1.0, 2.0}, {0.3, 0.7}, Sampling{7, 2000});
  for (const auto& r : rs) CHECK_MESSAGE(r.pass, r.name);
}

TEST_CASE("multiplier symbol") {
  MultiplierSymbol ms;
  ms.eta = {2.0, -1.0, 0.5};
  ms.t = ms.T;
  CHECK(multiplier_eval(ms, Vec3{3.0, 1.0, -2.0}) == 1.0);
  ms.t = 0.3;
  const double m = multiplier_eval(ms, Vec3{3.0, 1.0, -2.0});
  CHECK(m > 0.0);
  CHECK(m <= 1.0);
  MultiplierSymbol bad;
  bad.eps = 0.6;  // (1 - s)/(2s) = 0.5 at s = 0.5
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  const auto rs = multiplier_checks(MultiplierSymbol{}, Sampling{7, 200});
  for (const auto& r : rs) CHECK_MESSAGE(r.pass, r.name);
  CHECK(by_name(rs, "multiplier_commute").stats.at("max_rel_error") < 1e-5);
}

TEST_CASE("moment constants") {
  KernelParams kp;
  kp.gamma = 1.0;
  const auto rs = verify_constants(kp);
  for (const auto& r : rs) CHECK_MESSAGE(r.pass, r.name);
  CHECK(by_name(rs, "gamma1_lower_bound_gamma1").bound.value() ==
        doctest::Approx(0.01454).epsilon(1e-3));
}

TEST_CASE("field level checks on a small grid") {
  const VelocityGrid g = build_grid(4.0, 8);
  KernelParams kp;
  const auto aq = build_angular(kp, 6, 8);
  CHECK(verify_pos_neg_sandwich(g, kp.s, 20, 7).pass);
  CHECK(verify_split_partition(g, kp, aq, 2.0).pass);

  const auto fam = build_test_family(g, 3, 7);
  CHECK(fam.fields.size() == 38);
  CHECK(std::sqrt(fam.fields[5].squaredNorm() * g.cell()) == doctest::Approx(1.0));
  const auto again = build_test_family(g, 3, 7);
  CHECK((fam.fields.back() - again.fields.back()).norm() == 0.0);

  FieldContext ctx{g, kp, aq, fam};
  const auto co = verify_coercivity(ctx);
  CHECK(co.pass);
  CHECK(co.stats.at("c") > 0.0);
  CHECK(verify_trilinear(ctx, 5, 7).pass);
}
