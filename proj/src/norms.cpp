#include "kgap/norms.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace kgap {

double l2(const VelocityGrid& g, const Eigen::VectorXcd& f) {
  return std::sqrt(f.squaredNorm() * g.cell());
}

namespace {

Eigen::VectorXcd weighted(const VelocityGrid& g, const Eigen::VectorXcd& f, double k) {
  if (k == 0.0) return f;
  Eigen::VectorXcd w = f;
  for (Eigen::Index p = 0; p < f.size(); ++p) w[p] *= std::pow(japan(norm2(g.node(p))), k);
  return w;
}

Eigen::VectorXcd bessel(const VelocityGrid& g, const Eigen::VectorXcd& f, double beta) {
  if (beta == 0.0) return f;
  std::vector<cd> a(f.data(), f.data() + f.size());
  std::vector<cd> fh = g.forward(a);
  const int n = g.n();
  std::size_t q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++q) {
        const double x2 = g.xi(i) * g.xi(i) + g.xi(j) * g.xi(j) + g.xi(k) * g.xi(k);
        fh[q] *= std::pow(1.0 + x2, 0.5 * beta);
      }
  std::vector<cd> b = g.inverse(fh);
  return Eigen::Map<Eigen::VectorXcd>(b.data(), static_cast<Eigen::Index>(b.size()));
}

}  // namespace

double weighted_sobolev(const VelocityGrid& g, const Eigen::VectorXcd& f, const NormSpec& spec) {
  return l2(g, bessel(g, weighted(g, f, spec.k), spec.beta));
}

double sobolev_weighted(const VelocityGrid& g, const Eigen::VectorXcd& f, const NormSpec& spec) {
  return l2(g, weighted(g, bessel(g, f, spec.beta), spec.k));
}

double weighted_sobolev(const DistributionField& f, const NormSpec& spec) {
  double acc = 0.0;
  for (const auto& [l, v] : f.modes) {
    const double a = weighted_sobolev(f.grid, v, spec);
    acc += a * a;
  }
  return std::sqrt(acc);
}

double y_l_norm(const DistributionField& f, const YNorm& y) {
  const VelocityGrid& g = f.grid;
  double acc = 0.0;
  for (const auto& [l, v] : f.modes) {
    const double e0 = 2 * kPi * l[0], e1 = 2 * kPi * l[1], e2 = 2 * kPi * l[2];
    const double s2 = e0 * e0 + e1 * e1 + e2 * e2;
    const double s4 = e0 * e0 * e0 * e0 + e1 * e1 * e1 * e1 + e2 * e2 * e2 * e2;
    // sum over multi-indices of order 0, 1, 2 of prod eta_i^(2 alpha_i)
    const double c[3] = {1.0, s2, 0.5 * (s4 + s2 * s2)};
    for (int j = 0; j < 3; ++j) {
      if (c[j] == 0.0) continue;
      const double w = l2(g, weighted(g, v, y.m0 * (y.l - j)));
      acc += c[j] * w * w;
    }
  }
  return std::sqrt(acc);
}

namespace {

// sum over (v, v*, sigma) of W phi(|u|) weight(v*) |f(v') - f(v)|^2, f' from the cubic stencil.
double difference_form(const VelocityGrid& grid, const Eigen::VectorXcd& f,
                       const std::function<double(std::size_t ps)>& wstar,
                       const std::function<double(double r)>& phi, const AngularQuadrature& aq,
                       InterpRule rule) {
  const int n = grid.n();
  const bool mod = rule == InterpRule::Modulated;
  const Eigen::VectorXd mu = maxwellian_values(grid);
  std::vector<cd> A(f.data(), f.data() + f.size()), F(A);
  if (mod)
    for (std::size_t p = 0; p < A.size(); ++p) A[p] /= mu[p];
  const double h = grid.h();
  std::vector<double> mp[3];
  std::vector<cd> G, t1, t2;
  double acc = 0.0;
  SweepOptions so;
  sweep<4>(grid, aq, so, [&](const CollisionBlock<4>& blk) {
    const double W = blk.wang * phi(blk.r);
    if (W == 0.0) return;
    const Box& box = blk.box;
    G.resize(box.size());
    gather<4, cd>(A.data(), n, box, blk.gain, G.data(), t1, t2);
    if (mod)
      for (int d = 0; d < 3; ++d) {
        mp[d].resize(box.ext(d));
        const double delta = 0.5 * (blk.r * blk.sigma[d] - h * blk.du[d]);
        for (int q = 0; q < box.ext(d); ++q) {
          const double x = grid.x(box.lo[d] + q) + delta;
          mp[d][q] = std::exp(-0.5 * x * x) / std::sqrt(2 * kPi);
        }
      }
    std::size_t q = 0;
    double part = 0.0;
    for (int i = box.lo[0]; i <= box.hi[0]; ++i)
      for (int j = box.lo[1]; j <= box.hi[1]; ++j)
        for (int k = box.lo[2]; k <= box.hi[2]; ++k, ++q) {
          const std::size_t pv = grid.idx(i, j, k);
          const std::size_t ps = grid.idx(i - blk.du[0], j - blk.du[1], k - blk.du[2]);
          const cd fp = mod ? G[q] * (mp[0][i - box.lo[0]] * mp[1][j - box.lo[1]] *
                                      mp[2][k - box.lo[2]])
                            : G[q];
          part += wstar(ps) * std::norm(fp - F[pv]);
        }
    acc += W * part;
  });
  return acc * grid.cell();
}

}  // namespace

double j1_functional(const VelocityGrid& g, const Eigen::VectorXcd& f, const KernelParams& kp,
                     const AngularQuadrature& aq, KineticFactor phi, InterpRule rule) {
  const Eigen::VectorXd mu = maxwellian_values(g);
  CollisionOptions opt;
  opt.phi = phi;
  return difference_form(
      g, f, [&](std::size_t ps) { return mu[ps]; },
      [&](double r) { return kinetic_factor(kp, opt, r); }, aq, rule);
}

double c0_functional(const VelocityGrid& grid, const Eigen::VectorXd& F, const Eigen::VectorXcd& g,
                     const AngularQuadrature& aq, InterpRule rule) {
  return difference_form(
      grid, g, [&](std::size_t ps) { return F[ps]; }, [](double) { return 1.0; }, aq, rule);
}

double j1_fourier(const VelocityGrid& grid, const Eigen::VectorXd& F, const Eigen::VectorXcd& g,
                  const AngularQuadrature& aq) {
  const int n = grid.n();
  std::vector<cd> gv(g.data(), g.data() + g.size());
  std::vector<cd> Fv(F.size());
  for (Eigen::Index p = 0; p < F.size(); ++p) Fv[p] = F[p];
  const std::vector<cd> gh = grid.forward(gv);
  std::vector<cd> e0(n), e1(n), e2(n);
  const double zero[3] = {0.0, 0.0, 0.0};
  const cd F0 = eval_hat(grid, Fv, zero, e0, e1, e2);
  const double dxi3 = std::pow(grid.dxi() / (2.0 * kPi), 3);
  double acc = 0.0;
  std::size_t q = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c, ++q) {
        const Vec3 xi{grid.xi(a), grid.xi(b), grid.xi(c)};
        const double r = std::sqrt(norm2(xi));
        if (r == 0.0) continue;
        const Frame fr = make_frame(Vec3{xi[0] / r, xi[1] / r, xi[2] / r});
        double part = 0.0;
        for (std::size_t it = 0; it < aq.n_theta(); ++it) {
          double pt = 0.0;
          for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
            const Vec3 s = aq.sigma(fr, it, ip);
            const double xp[3] = {0.5 * (xi[0] + r * s[0]), 0.5 * (xi[1] + r * s[1]),
                                  0.5 * (xi[2] + r * s[2])};
            const double xm[3] = {0.5 * (xi[0] - r * s[0]), 0.5 * (xi[1] - r * s[1]),
                                  0.5 * (xi[2] - r * s[2])};
            const cd gp = eval_hat(grid, gv, xp, e0, e1, e2);
            const cd Fm = eval_hat(grid, Fv, xm, e0, e1, e2);
            pt += (F0 * std::norm(gh[q] - gp)).real() +
                  2.0 * ((F0 - Fm) * gp * std::conj(gh[q])).real();
          }
          part += aq.w_theta[it] * aq.w_phi * pt;
        }
        acc += part;
      }
  return dxi3 * acc;
}

double entropy_dissipation(const VelocityGrid& g, const Eigen::VectorXd& F, const KernelParams& kp,
                           const AngularQuadrature& aq) {
  if (F.minCoeff() <= 0.0) throw InvalidArgument("entropy dissipation needs F > 0 at all nodes");
  const Eigen::VectorXd q = q_direct_real(g, F, F, kp, aq);
  return -(q.array() * F.array().log()).sum() * g.cell();
}

double l_log_l(const VelocityGrid& g, const Eigen::VectorXd& F) {
  double acc = 0.0;
  for (Eigen::Index p = 0; p < F.size(); ++p)
    if (F[p] > 0.0) acc += F[p] * std::abs(std::log(F[p]));
  return acc * g.cell();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> pos_neg_parts(const Eigen::VectorXd& h) {
  return {h.cwiseMax(0.0), h.cwiseMin(0.0)};
}

namespace {

// Z(s) = sum over nonzero integer vectors of |m|^(-3-2s).
double lattice_zeta(double s) {
  static std::mutex mx;
  static std::map<double, double> cache;
  std::lock_guard<std::mutex> lock(mx);
  auto it = cache.find(s);
  if (it != cache.end()) return it->second;
  const int M = 48;
  double acc = 0.0;
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b)
      for (int c = -M; c <= M; ++c) {
        const int r2 = a * a + b * b + c * c;
        if (r2 == 0 || r2 > M * M) continue;
        acc += std::pow(double(r2), -1.5 - s);
      }
  // Tail of the ball sum by the integral from the ball boundary.
  const double R = M + 0.5;
  acc += 4.0 * kPi * std::pow(R, -2.0 * s) / (2.0 * s);
  cache[s] = acc;
  return acc;
}

double c_ds(double s) {
  return s * std::pow(2.0, 2 * s) * std::tgamma(1.5 + s) / (std::pow(kPi, 1.5) * std::tgamma(1.0 - s));
}

}  // namespace

double gagliardo_seminorm2(const VelocityGrid& g, const Eigen::VectorXd& h, double s) {
  const int n = g.n();
  const double hh = g.h();
  const int m = 2 * n - 1;
  std::vector<double> K(static_cast<std::size_t>(m) * m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const int da = a - (n - 1), db = b - (n - 1), dc = c - (n - 1);
        const int r2 = da * da + db * db + dc * dc;
        K[(static_cast<std::size_t>(a) * m + b) * m + c] =
            r2 == 0 ? 0.0 : std::pow(hh * hh * r2, -1.5 - s);
      }
  const std::size_t N = g.size();
  double cross = 0.0;
  for (std::size_t x = 0; x < N; ++x) {
    if (h[x] == 0.0) continue;
    const auto ix = g.ijk(x);
    double conv = 0.0;
    for (std::size_t y = 0; y < N; ++y) {
      if (h[y] == 0.0) continue;
      const auto iy = g.ijk(y);
      conv += K[(static_cast<std::size_t>(iy[0] - ix[0] + n - 1) * m + (iy[1] - ix[1] + n - 1)) * m +
                (iy[2] - ix[2] + n - 1)] *
              h[y];
    }
    cross += h[x] * conv;
  }
  const double h6 = std::pow(hh, 6);
  const double total = h.squaredNorm() * std::pow(hh, -3.0 - 2.0 * s) * lattice_zeta(s);
  return 2.0 * c_ds(s) * h6 * (total - cross);
}

double hs_norm2_gagliardo(const VelocityGrid& g, const Eigen::VectorXd& h, double s) {
  return h.squaredNorm() * g.cell() + gagliardo_seminorm2(g, h, s);
}

}  // namespace kgap
