#include <cmath>

#include "doctest.h"
#include "kgap/config.hpp"
#include "kgap/dynamics.hpp"
#include "kgap/suites.hpp"

using namespace kgap;

namespace {

struct Small {
  KernelParams kp;
  VelocityGrid g = build_grid(4.0, 6);
  AngularQuadrature aq = build_angular(kp, 6, 8);
  LinearModel m = LinearModel::assemble(g, kp, aq);
  EvolutionConfig cfg;
  Small() {
    cfg.dt = 0.05;
    cfg.t_end = 0.5;
    cfg.T0 = 0.0;
  }
};

Small& small() {
  static Small s;
  return s;
}

double state_diff(const DistributionField& a, const DistributionField& b) {
  return (a - b).l2() / std::max(b.l2(), 1e-300);
}

}  // namespace

TEST_CASE("the l = 0 generator keeps five conserved directions") {
  auto& s = small();
  CHECK(s.m.cluster_dim() == 5);
  CHECK(s.m.gap() > 0.0);
  CHECK(s.m.abscissa({1, 0, 0}) < 0.0);
}

TEST_CASE("propagators compose") {
  auto& s = small();
  for (const Mode& l : {Mode{0, 0, 0}, Mode{1, 0, 0}}) {
    const Eigen::MatrixXcd ab = s.m.propagator(l, 0.3) * s.m.propagator(l, 0.2);
    const Eigen::MatrixXcd c = s.m.propagator(l, 0.5);
    CHECK((ab - c).norm() < 1e-10 * c.norm());
  }
}

TEST_CASE("linear evolution is linear and matches RK4") {
  auto& s = small();
  const auto f = small_perturbation(s.g, 1e-3, s.cfg.y, 3);
  const auto h = small_perturbation(s.g, 1e-3, s.cfg.y, 4);
  const auto a = evolve_linear(f, s.m, s.kp, s.cfg).final_state;
  const auto b = evolve_linear(h, s.m, s.kp, s.cfg).final_state;
  const auto ab = evolve_linear(cd(2.0) * f + h, s.m, s.kp, s.cfg).final_state;
  CHECK(state_diff(ab, cd(2.0) * a + b) < 1e-12);

  EvolutionConfig rk = s.cfg;
  rk.integrator = Integrator::RK4;
  rk.t_end = 0.1;
  rk.dt = rk.t_end / std::ceil(rk.t_end * s.m.spectral_radius() / 0.5);
  EvolutionConfig ex = rk;
  ex.integrator = Integrator::Exponential;
  const auto r2 = evolve_linear(f, s.m, s.kp, ex).final_state;
  const double e1 = state_diff(evolve_linear(f, s.m, s.kp, rk).final_state, r2);
  CHECK(e1 < 1e-6);
  rk.dt *= 0.5;
  const double e2 = state_diff(evolve_linear(f, s.m, s.kp, rk).final_state, r2);
  CHECK(e1 / e2 > 16.0);

  REQUIRE(s.m.spectral_radius() > 40.0);
  EvolutionConfig bad = rk;
  bad.dt = rk.t_end / std::floor(rk.t_end * s.m.spectral_radius() / 4.0);
  CHECK_THROWS_AS(evolve_linear(f, s.m, s.kp, bad), InvalidArgument);
}

TEST_CASE("the equilibrium does not move") {
  auto& s = small();
  const auto tr = evolve_nonlinear(DistributionField(s.g), s.m, s.kp, s.aq, s.cfg);
  for (double y : tr.y_norm) CHECK(y == 0.0);
  CHECK(tr.moment_drift() == 0.0);
  CHECK(positivity_monitor(tr).pass);
}

TEST_CASE("nonlinear evolution keeps moments and stays near the linear flow") {
  auto& s = small();
  const auto f = small_perturbation(s.g, 1e-4, s.cfg.y, 5);
  const auto nl = evolve_nonlinear(f, s.m, s.kp, s.aq, s.cfg);
  const auto li = evolve_linear(f, s.m, s.kp, s.cfg);
  CHECK(nl.moment_drift() < 1e-10);
  CHECK(nl.y_norm.back() < nl.y_norm.front());
  // The quadratic term is of relative size |f0| ~ 1e-4.
  CHECK(state_diff(nl.final_state, li.final_state) < 1e-2);

  EvolutionConfig big = s.cfg;
  CHECK_THROWS_AS(evolve_nonlinear(small_perturbation(s.g, 1.0, s.cfg.y, 5), s.m, s.kp, s.aq, big),
                  InvalidArgument);
}

TEST_CASE("Picard iteration") {
  auto& s = small();
  const auto zero = picard_solve(DistributionField(s.g), s.m, s.kp, s.aq, s.cfg);
  CHECK(zero.converged);
  CHECK(zero.iterations == 1);

  EvolutionConfig c = s.cfg;
  c.t_end = 0.2;
  const auto f = small_perturbation(s.g, 1e-3, c.y, 6);
  const auto pr = picard_solve(f, s.m, s.kp, s.aq, c);
  CHECK(pr.converged);
  for (double r : pr.ratios) CHECK(r < 1.0);
  const auto direct = evolve_nonlinear(f, s.m, s.kp, s.aq, c);
  CHECK(state_diff(pr.trajectory.final_state, direct.final_state) < 1e-8);
  CHECK(pr.table().size() == pr.w_norms.size());
}

TEST_CASE("triple norm limits") {
  auto& s = small();
  TripleNormParams tp;
  CHECK(semigroup_triple_norm(DistributionField(s.g), s.m, s.cfg, tp) == 0.0);
  const auto f = small_perturbation(s.g, 1e-3, s.cfg.y, 7);
  tp.A = 0.0;
  CHECK(semigroup_triple_norm(f, s.m, s.cfg, tp) == doctest::Approx(y_l_norm(f, s.cfg.y)));
  tp.A = 1.0;
  CHECK(semigroup_triple_norm(f, s.m, s.cfg, tp) > y_l_norm(f, s.cfg.y));
}

TEST_CASE("decay rate fits skip the roundoff plateau") {
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    v.push_back(std::max(std::exp(-3.0 * t.back()), 1e-11));
  }
  CHECK(decay_rate(t, v, 0.0, 2.0) == doctest::Approx(3.0));
  CHECK(tail_decay_rate(t, v) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("positivity monitor flags negative values") {
  TrajectoryRecord tr;
  tr.times = {0.0, 1.0};
  tr.max_F = {1.0, 1.0};
  tr.min_F = {1e-3, -1e-6};
  tr.neg_part = {0.0, 1e-6};
  const auto r = positivity_monitor(tr);
  CHECK_FALSE(r.pass);
  CHECK(r.stats.at("records_below_bound") == 1.0);
}

TEST_CASE("config parsing names the offending key") {
  RunConfig d = parse_config(json::object());
  CHECK(d.n == 10);
  CHECK(d.l0() == std::ceil(42.0 / 5.0));
  const RunConfig back = parse_config(json::parse(R"({"n_velocity": 8, "seed": 3})"));
  CHECK(back.n == 8);
  CHECK(back.seed == 3);

  auto message = [](const char* text) {
    try {
      parse_config(json::parse(text));
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"n_velocity": 9})").find("n_velocity") != std::string::npos);
  CHECK(message(R"({"no_such_key": 1})").find("no_such_key") != std::string::npos);
  CHECK(message(R"({"y_m0": 1.5})").find("y_m0") != std::string::npos);
  CHECK(message(R"({"theta_min_rad": "x"})").find("theta_min_rad") != std::string::npos);
  CHECK(message(R"({"suite": "bogus"})").find("suite") != std::string::npos);
}

TEST_CASE("initial states") {
  RunConfig c;
  c.n = 6;
  c.Lv = 4.0;
  const VelocityGrid g = build_grid(c.Lv, c.n);
  c.initial = "zero";
  CHECK(initial_state(c, g).l2() == 0.0);
  c.initial = "homogeneous";
  const auto h = initial_state(c, g);
  CHECK(h.modes.size() == 1);
  CHECK(y_l_norm(h, c.y) == doctest::Approx(c.f0_y_norm));
  c.initial = "perturbation";
  CHECK(initial_state(c, g).modes.size() == 3);
}

TEST_CASE("collide reports on a small grid") {
  RunConfig c;
  c.n = 8;
  c.Lv = 5.0;
  const auto rs = collide_reports(c);
  CHECK(rs.size() == 4);
  CHECK(all_pass(rs));
}
