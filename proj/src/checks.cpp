#include "kgap/checks.hpp"

#include <cmath>

namespace kgap {

double GaussianBump::operator()(const Vec3& v) const {
  if (constant()) return amp;
  const Vec3 d{v[0] - center[0], v[1] - center[1], v[2] - center[2]};
  return amp * std::exp(-0.5 * norm2(d) / var);
}

double GaussianBump::sphere(const Vec3& p, double rho) const {
  if (constant()) return 4.0 * kPi * amp;
  const Vec3 d{p[0] - center[0], p[1] - center[1], p[2] - center[2]};
  const double D = std::sqrt(norm2(d));
  const double x = D * rho / var;
  if (x < 1e-6)
    return 4.0 * kPi * amp * std::exp(-0.5 * (D * D + rho * rho) / var) * (1.0 + x * x / 6.0);
  const double a = std::exp(-0.5 * (D - rho) * (D - rho) / var);
  const double b = std::exp(-0.5 * (D + rho) * (D + rho) / var);
  return 4.0 * kPi * amp * (a - b) / (2.0 * x);
}

GaussianBump GaussianBump::squared() const {
  GaussianBump s = *this;
  s.amp = amp * amp;
  if (!constant()) s.var = 0.5 * var;
  return s;
}

cd GaussianBump::hat(const Vec3& xi) const {
  const double c = amp * std::pow(2.0 * kPi * var, 1.5) * std::exp(-0.5 * var * norm2(xi));
  return std::polar(c, -dot(center, xi));
}

namespace {

struct Radial {
  std::vector<double> x, w;
  Radial(double R, const RadialRule& rr) {
    std::vector<double> px, pw;
    for (int p = 0; p < rr.panels; ++p) {
      gauss_legendre(rr.order, R * p / rr.panels, R * (p + 1) / rr.panels, px, pw);
      x.insert(x.end(), px.begin(), px.end());
      w.insert(w.end(), pw.begin(), pw.end());
    }
  }
  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
    return acc;
  }
};

double reach(const GaussianBump& g, const Vec3& p) {
  const Vec3 d{p[0] - g.center[0], p[1] - g.center[1], p[2] - g.center[2]};
  return std::sqrt(norm2(d)) + 12.0 * std::sqrt(g.var);
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

double phi_total(const AngularQuadrature& aq) { return aq.w_phi * double(aq.n_phi()); }

}  // namespace

EstimateReport cancellation_check(const VelocityGrid& grid, const Eigen::VectorXd& f,
                                  const GaussianBump& g, const KernelParams& kp,
                                  const AngularQuadrature& aq, double tol, const RadialRule& rr) {
  const GaussianBump g2 = g.squared();
  CollisionOptions full;
  auto Phi = [&](double r) { return kinetic_factor(kp, full, r); };
  const double tp = phi_total(aq);
  double direct = 0.0, conv = 0.0;
  if (!g.constant()) {
    for (std::size_t p = 0; p < grid.size(); ++p) {
      if (f[p] == 0.0) continue;
      const Vec3 vs = grid.node(p);
      const double R = reach(g2, vs) / std::cos(kPi / 4);
      const Radial rad(R, rr);
      double dp = 0.0;
      for (std::size_t it = 0; it < aq.n_theta(); ++it) {
        const double c = std::cos(0.5 * aq.theta[it]);
        dp += aq.w_theta[it] * rad.integrate([&](double r) {
          return r * r * Phi(r) * (g2.sphere(vs, r * c) - g2.sphere(vs, r));
        });
      }
      const double cp = rad.integrate([&](double r) {
        double S = 0.0;
        for (std::size_t it = 0; it < aq.n_theta(); ++it) {
          const double c = std::cos(0.5 * aq.theta[it]);
          S += aq.w_theta[it] * (Phi(r / c) / (c * c * c) - Phi(r));
        }
        return r * r * S * g2.sphere(vs, r);
      });
      direct += f[p] * tp * dp;
      conv += f[p] * tp * cp;
    }
    direct *= grid.cell();
    conv *= grid.cell();
  }
  EstimateReport rep;
  rep.name = "cancellation";
  rep.tier = Tier::Exact;
  rep.n_samples = static_cast<long>(grid.size());
  rep.family = g.constant() ? "g constant" : "gaussian bump";
  rep.stats["direct"] = direct;
  rep.stats["convolution"] = conv;
  rep.stats["rel_discrepancy"] = rel(direct, conv);
  rep.tolerances["rel"] = tol;
  rep.context["theta_min_rad"] = std::to_string(kp.theta_min);
  rep.pass = rel(direct, conv) <= tol;
  return rep;
}

EstimateReport change_of_variables_check(const GaussianBump& F, const Vec3& p,
                                         const KernelParams& kp, const AngularQuadrature& aq,
                                         bool singular, double tol, const RadialRule& rr) {
  CollisionOptions full;
  auto Phi = [&](double r) { return kinetic_factor(kp, full, r); };
  const double tp = phi_total(aq);
  double lhs = 0.0, rhs = 0.0;
  if (F.amp != 0.0) {
    const double reachF = F.constant() ? 10.0 : reach(F, p);
    // Left side: the map v -> v' (or v* -> v') rescales the radius by c.
    for (std::size_t it = 0; it < aq.n_theta(); ++it) {
      const double th = aq.theta[it];
      const double c = singular ? std::sin(0.5 * th) : std::cos(0.5 * th);
      const Radial rad(reachF / c, rr);
      lhs += aq.w_theta[it] *
             rad.integrate([&](double r) { return r * r * Phi(r) * F.sphere(p, r * c); });
    }
    const Radial rad(reachF, rr);
    rhs = rad.integrate([&](double r) {
      double K = 0.0;
      for (std::size_t it = 0; it < aq.n_theta(); ++it) {
        const double th = aq.theta[it];
        const double c = singular ? std::sin(0.5 * th) : std::cos(0.5 * th);
        K += aq.w_theta[it] * Phi(r / c) / (c * c * c);
      }
      return r * r * K * F.sphere(p, r);
    });
    lhs *= tp;
    rhs *= tp;
  }
  EstimateReport rep;
  rep.name = singular ? "singular_change_of_variables" : "regular_change_of_variables";
  rep.tier = Tier::Exact;
  rep.n_samples = 1;
  rep.family = F.amp == 0.0 ? "zero" : "gaussian";
  rep.stats["lhs"] = lhs;
  rep.stats["rhs"] = rhs;
  rep.stats["rel_discrepancy"] = rel(lhs, rhs);
  rep.tolerances["rel"] = tol;
  rep.context["theta_min_rad"] = std::to_string(kp.theta_min);
  rep.pass = rel(lhs, rhs) <= tol;
  return rep;
}

EstimateReport j1_fourier_identity(const VelocityGrid& grid, const GaussianBump& g,
                                   const AngularQuadrature& aq, double tol) {
  // Physical side on the lattice with exact values of g at v'.
  const std::size_t N = grid.size();
  const Eigen::VectorXd mu = maxwellian_values(grid);
  std::vector<double> gv(N);
  for (std::size_t p = 0; p < N; ++p) gv[p] = g(grid.node(p));
  double phys = 0.0;
  for (std::size_t pv = 0; pv < N; ++pv) {
    const Vec3 v = grid.node(pv);
    for (std::size_t ps = 0; ps < N; ++ps) {
      if (ps == pv) continue;
      const Vec3 w = grid.node(ps);
      const Vec3 u{v[0] - w[0], v[1] - w[1], v[2] - w[2]};
      const double r = std::sqrt(norm2(u));
      const Frame fr = make_frame(Vec3{u[0] / r, u[1] / r, u[2] / r});
      double acc = 0.0;
      for (std::size_t it = 0; it < aq.n_theta(); ++it) {
        double a = 0.0;
        for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
          const Vec3 s = aq.sigma(fr, it, ip);
          const Vec3 vp{0.5 * (v[0] + w[0] + r * s[0]), 0.5 * (v[1] + w[1] + r * s[1]),
                        0.5 * (v[2] + w[2] + r * s[2])};
          const double d = g(vp) - gv[pv];
          a += d * d;
        }
        acc += aq.w_theta[it] * aq.w_phi * a;
      }
      phys += mu[ps] * acc;
    }
  }
  phys *= grid.cell() * grid.cell();

  // Fourier side on a xi lattice wide enough for ghat.
  const double dxi = grid.dxi();
  const double Xi = 9.0 / std::sqrt(g.var);
  const int m = static_cast<int>(std::ceil(Xi / dxi));
  auto muhat = [](const Vec3& x) { return std::exp(-0.5 * norm2(x)); };
  double four = 0.0;
  for (int a = -m; a <= m; ++a)
    for (int b = -m; b <= m; ++b)
      for (int c = -m; c <= m; ++c) {
        const Vec3 xi{a * dxi, b * dxi, c * dxi};
        const double r = std::sqrt(norm2(xi));
        if (r == 0.0) continue;
        const Frame fr = make_frame(Vec3{xi[0] / r, xi[1] / r, xi[2] / r});
        const cd gx = g.hat(xi);
        double acc = 0.0;
        for (std::size_t it = 0; it < aq.n_theta(); ++it) {
          double t = 0.0;
          for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
            const Vec3 s = aq.sigma(fr, it, ip);
            const Vec3 xp{0.5 * (xi[0] + r * s[0]), 0.5 * (xi[1] + r * s[1]),
                          0.5 * (xi[2] + r * s[2])};
            const Vec3 xm{0.5 * (xi[0] - r * s[0]), 0.5 * (xi[1] - r * s[1]),
                          0.5 * (xi[2] - r * s[2])};
            const cd gp = g.hat(xp);
            t += std::norm(gx - gp) + 2.0 * ((1.0 - muhat(xm)) * gp * std::conj(gx)).real();
          }
          acc += aq.w_theta[it] * aq.w_phi * t;
        }
        four += acc;
      }
  four *= std::pow(dxi / (2.0 * kPi), 3);

  EstimateReport rep;
  rep.name = "j1_fourier_identity";
  rep.tier = Tier::Exact;
  rep.n_samples = static_cast<long>(N);
  rep.family = "gaussian bump";
  rep.stats["physical"] = phys;
  rep.stats["fourier"] = four;
  rep.stats["rel_discrepancy"] = rel(phys, four);
  rep.tolerances["rel"] = tol;
  rep.pass = rel(phys, four) <= tol;
  return rep;
}

Eigen::VectorXd weak_invariant_moments(const VelocityGrid& grid, const Eigen::VectorXd& f,
                                       const KernelParams& kp, const AngularQuadrature& aq,
                                       const CollisionOptions& opt) {
  const int n = grid.n();
  const double h = grid.h();
  const double reach = kinetic_support(opt);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(5);
  // Pairs below this product cannot move the moments at double precision.
  const double fmax = f.cwiseAbs().maxCoeff();
  const double skip = 1e-24 * fmax * fmax;
  std::vector<Vec3> sg;
  std::vector<double> wt;
  for (int d0 = -(n - 1); d0 < n; ++d0)
    for (int d1 = -(n - 1); d1 < n; ++d1)
      for (int d2 = -(n - 1); d2 < n; ++d2) {
        if (d0 == 0 && d1 == 0 && d2 == 0) continue;
        const Vec3 u{d0 * h, d1 * h, d2 * h};
        const double r = std::sqrt(norm2(u));
        if (reach >= 0.0 && r >= reach) continue;
        const double phi = kinetic_factor(kp, opt, r);
        if (phi == 0.0) continue;
        const Frame fr = make_frame(Vec3{u[0] / r, u[1] / r, u[2] / r});
        sg.clear();
        wt.clear();
        for (std::size_t it = 0; it < aq.n_theta(); ++it)
          for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
            sg.push_back(aq.sigma(fr, it, ip));
            wt.push_back(0.5 * aq.w_theta[it] * aq.w_phi * phi);
          }
        const int lo[3] = {std::max(0, d0), std::max(0, d1), std::max(0, d2)};
        const int hi[3] = {std::min(n, n + d0), std::min(n, n + d1), std::min(n, n + d2)};
        for (int i = lo[0]; i < hi[0]; ++i)
          for (int j = lo[1]; j < hi[1]; ++j)
            for (int k = lo[2]; k < hi[2]; ++k) {
              const std::size_t p = grid.idx(i, j, k), q = grid.idx(i - d0, j - d1, k - d2);
              const double ff = f[p] * f[q];
              if (std::abs(ff) < skip) continue;
              const Vec3 v = grid.node(p), vs = grid.node(q);
              const double e0 = norm2(v) + norm2(vs);
              for (std::size_t a = 0; a < sg.size(); ++a) {
                Vec3 vp, vsp;
                for (int c = 0; c < 3; ++c) {
                  const double m = 0.5 * (v[c] + vs[c]);
                  vp[c] = m + 0.5 * r * sg[a][c];
                  vsp[c] = m - 0.5 * r * sg[a][c];
                }
                const double w = wt[a] * ff;
                for (int c = 0; c < 3; ++c) out[1 + c] += w * (vp[c] + vsp[c] - v[c] - vs[c]);
                out[4] += w * (norm2(vp) + norm2(vsp) - e0);
              }
            }
      }
  return out * grid.cell() * grid.cell();
}

EstimateReport conservation_check(const VelocityGrid& grid, const Eigen::VectorXd& f,
                                  const KernelParams& kp, const AngularQuadrature& aq,
                                  double tol) {
  const double f2 = f.squaredNorm() * grid.cell();
  const Eigen::VectorXd weak = weak_invariant_moments(grid, f, kp, aq);
  CollisionOptions raw;
  raw.conservative = false;
  const Eigen::MatrixXd inv = invariants(grid);
  const Eigen::VectorXd mr = grid.cell() * (inv.transpose() * q_direct_real(grid, f, f, kp, aq, raw));
  const Eigen::VectorXd mc = grid.cell() * (inv.transpose() * q_direct_real(grid, f, f, kp, aq));
  EstimateReport rep;
  rep.name = "conservation";
  rep.tier = Tier::Exact;
  rep.n_samples = static_cast<long>(grid.size());
  rep.family = "smooth field";
  const char* names[5] = {"mass", "momentum_1", "momentum_2", "momentum_3", "energy"};
  double worst = 0.0;
  for (int a = 0; a < 5; ++a) {
    rep.stats[std::string("weak_") + names[a]] = weak[a] / f2;
    worst = std::max(worst, std::abs(weak[a]) / f2);
  }
  rep.stats["weak_max_over_norm2"] = worst;
  rep.stats["strong_raw_max_over_norm2"] = mr.cwiseAbs().maxCoeff() / f2;
  rep.stats["strong_corrected_max_over_norm2"] = mc.cwiseAbs().maxCoeff() / f2;
  rep.tolerances["weak_over_norm2"] = tol;
  rep.context["n"] = std::to_string(grid.n());
  rep.context["velocity_half_width"] = std::to_string(grid.Lv());
  rep.pass = worst <= tol;
  return rep;
}

EstimateReport equilibrium_check(const VelocityGrid& grid, const KernelParams& kp,
                                 const AngularQuadrature& aq, double tol) {
  const Eigen::VectorXd mu = maxwellian_values(grid);
  CollisionOptions raw;
  raw.conservative = false;
  const Eigen::VectorXd q = q_direct_real(grid, mu, mu, kp, aq, raw);
  EstimateReport rep;
  rep.name = "equilibrium";
  rep.tier = Tier::Exact;
  rep.n_samples = static_cast<long>(grid.size());
  rep.family = "maxwellian";
  rep.stats["q_over_mu"] = q.norm() / mu.norm();
  rep.stats["q_max"] = q.cwiseAbs().maxCoeff();
  rep.tolerances["q_over_mu"] = tol;
  rep.context["n"] = std::to_string(grid.n());
  rep.context["velocity_half_width"] = std::to_string(grid.Lv());
  rep.pass = q.norm() / mu.norm() <= tol;
  return rep;
}

std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> smooth_pairs(const VelocityGrid& g) {
  const Eigen::VectorXd mu = maxwellian_values(g);
  const double c = std::pow(2.0 * kPi, -1.5);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> out(
      3, {Eigen::VectorXd(g.size()), Eigen::VectorXd(g.size())});
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 v = g.node(p);
    const Vec3 w{v[0] - 0.3, v[1], v[2] + 0.2};
    out[0].first[p] = mu[p] * (1.0 + 0.3 * v[0] + 0.1 * (v[1] * v[1] - 1.0));
    out[0].second[p] = mu[p] * (1.0 - 0.2 * v[2] + 0.1 * v[0] * v[1]);
    out[1].first[p] = out[0].first[p];
    out[1].second[p] = c * std::exp(-0.5 * norm2(w));
    out[2].first[p] = out[1].second[p];
    out[2].second[p] = std::exp(-0.7 * norm2(w));
  }
  return out;
}

EstimateReport cross_oracle_check(const KernelParams& kp, const SplitParams& sp, int n_theta,
                                  int n_phi, const CrossOracleParams& cp) {
  const AngularQuadrature aq = build_angular(kp, n_theta, n_phi);
  CollisionOptions opt;
  opt.phi = KineticFactor::CutR;
  opt.sp = sp;
  opt.conservative = false;
  auto errors = [&](int n) {
    const VelocityGrid g = build_grid(cp.Lv, n);
    std::vector<double> e;
    for (const auto& [f, h] : smooth_pairs(g)) {
      const auto F = DistributionField::homogeneous(g, f);
      const auto G = DistributionField::homogeneous(g, h);
      const Eigen::VectorXd d = q_direct(F, G, kp, aq, opt).zero_mode();
      const Eigen::VectorXd q = q_fourier(F, G, kp, sp, aq).zero_mode();
      e.push_back((d - q).norm() / q.norm());
    }
    return e;
  };
  const auto ec = errors(cp.n_coarse);
  std::vector<double> ef;
  if (cp.n_fine > 0) ef = errors(cp.n_fine);
  EstimateReport rep;
  rep.name = "cross_oracle";
  rep.tier = Tier::Exact;
  rep.n_samples = static_cast<long>(ec.size());
  rep.family = "smooth pairs";
  bool pass = !ef.empty();
  for (std::size_t i = 0; i < ec.size(); ++i) {
    const std::string k = "pair" + std::to_string(i + 1);
    rep.stats[k + "_rel_l2_n" + std::to_string(cp.n_coarse)] = ec[i];
    pass = pass && ec[i] < cp.tol;
    if (!ef.empty()) {
      rep.stats[k + "_rel_l2_n" + std::to_string(cp.n_fine)] = ef[i];
      rep.stats[k + "_ratio"] = ec[i] / ef[i];
      pass = pass && ec[i] / ef[i] >= cp.min_ratio;
    }
  }
  rep.tolerances["rel_l2"] = cp.tol;
  rep.tolerances["min_ratio"] = cp.min_ratio;
  rep.context["velocity_half_width"] = std::to_string(cp.Lv);
  rep.context["split_radius"] = std::to_string(sp.R);
  if (ef.empty()) rep.context["refinement"] = "skipped";
  rep.pass = pass;
  return rep;
}

}  // namespace kgap
