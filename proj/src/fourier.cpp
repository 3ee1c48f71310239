#include <boost/math/quadrature/gauss.hpp>

#include "kgap/collision.hpp"

namespace kgap {

// Trigonometric-polynomial value fhat(xi) = h^3 sum_j f_j exp(-i v_j . xi).
cd eval_hat(const VelocityGrid& g, const std::vector<cd>& f, const double xi[3],
            std::vector<cd>& e0, std::vector<cd>& e1, std::vector<cd>& e2) {
  const int n = g.n();
  for (int i = 0; i < n; ++i) {
    e0[i] = std::polar(1.0, -g.x(i) * xi[0]);
    e1[i] = std::polar(1.0, -g.x(i) * xi[1]);
    e2[i] = std::polar(1.0, -g.x(i) * xi[2]);
  }
  cd acc = 0.0;
  std::size_t q = 0;
  for (int i = 0; i < n; ++i) {
    cd ai = 0.0;
    for (int j = 0; j < n; ++j) {
      cd aj = 0.0;
      for (int k = 0; k < n; ++k) aj += e2[k] * f[q++];
      ai += e1[j] * aj;
    }
    acc += e0[i] * ai;
  }
  return g.cell() * acc;
}

namespace {

// Radial transform of the truncated kinetic factor,
// Phihat(k) = 4 pi int_0^{2R} r^2 |r|^gamma chi_R(r) sin(kr)/(kr) dr, tabulated on a fine
// uniform k grid and read back with 4-point Lagrange interpolation.
class RadialTable {
 public:
  RadialTable(const KernelParams& kp, const SplitParams& sp, double kmax) {
    dk_ = 0.01 / sp.R;
    const std::size_t m = static_cast<std::size_t>(kmax / dk_) + 5;
    table_.resize(m);
    const int panels = 64;
    std::vector<double> rs, ws;
    for (int p = 0; p < panels; ++p) {
      double a = 2.0 * sp.R * p / panels, b = 2.0 * sp.R * (p + 1) / panels;
      for (std::size_t i = 0; i < boost::math::quadrature::gauss<double, 10>::abscissa().size(); ++i) {
        double x = boost::math::quadrature::gauss<double, 10>::abscissa()[i];
        double w = boost::math::quadrature::gauss<double, 10>::weights()[i];
        for (int sg : {-1, 1}) {
          if (x == 0.0 && sg == 1) continue;
          double r = 0.5 * (a + b) + 0.5 * (b - a) * sg * x;
          rs.push_back(r);
          ws.push_back(0.5 * (b - a) * w * 4.0 * kPi * r * r * std::pow(r, kp.gamma) * sp.chi(r));
        }
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      // Entry j holds k = (j - 1) dk so the stencil near k = 0 is defined (even function).
      double k = std::abs((double(j) - 1.0) * dk_), acc = 0.0;
      for (std::size_t i = 0; i < rs.size(); ++i) {
        double kr = k * rs[i];
        acc += ws[i] * (kr < 1e-8 ? 1.0 - kr * kr / 6.0 : std::sin(kr) / kr);
      }
      table_[j] = acc;
    }
  }
  double operator()(double k) const {
    double x = k / dk_;
    std::size_t j = static_cast<std::size_t>(x);
    double t = x - j;
    const double* p = table_.data() + j;  // nodes at t = -1, 0, 1, 2
    double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm * p[0] + w0 * p[1] + w1 * p[2] + w2 * p[3];
  }

 private:
  double dk_;
  std::vector<double> table_;
};


std::vector<cd> fourier_pair_cut(const VelocityGrid& g, const std::vector<cd>& f,
                                 const std::vector<cd>& gg, const KernelParams& kp,
                                 const SplitParams& sp, const AngularQuadrature& aq) {
  const int n = g.n();
  const auto fh = g.forward(f);
  const auto gh = g.forward(gg);
  double fmax = 0.0, gmax = 0.0;
  for (std::size_t p = 0; p < fh.size(); ++p) {
    fmax = std::max(fmax, std::abs(fh[p]));
    gmax = std::max(gmax, std::abs(gh[p]));
  }
  const double tol = 1e-14 * fmax * gmax;
  const double kmax = 2.0 * std::sqrt(3.0) * (n / 2 + 1) * g.dxi();
  RadialTable phat(kp, sp, kmax);
  const double C = std::pow(g.dxi() / (2.0 * kPi), 3);

  std::vector<cd> Qh(g.size(), cd(0));
  std::vector<double> bx, by, bz;
  std::vector<cd> bc;
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2) {
        const double xi[3] = {g.xi(a0), g.xi(a1), g.xi(a2)};
        const double xn = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        if (xn == 0.0) continue;
        bx.clear(), by.clear(), bz.clear(), bc.clear();
        cd loss = 0.0;
        for (int b0 = 0; b0 < n; ++b0) {
          int c0 = a0 - b0 + n / 2;
          if (c0 < 0 || c0 >= n) continue;
          for (int b1 = 0; b1 < n; ++b1) {
            int c1 = a1 - b1 + n / 2;
            if (c1 < 0 || c1 >= n) continue;
            for (int b2 = 0; b2 < n; ++b2) {
              int c2 = a2 - b2 + n / 2;
              if (c2 < 0 || c2 >= n) continue;
              cd c = fh[g.idx(b0, b1, b2)] * gh[g.idx(c0, c1, c2)];
              if (std::abs(c) < tol) continue;
              double x = g.xi(b0), y = g.xi(b1), z = g.xi(b2);
              bx.push_back(x), by.push_back(y), bz.push_back(z), bc.push_back(c);
              loss += phat(std::sqrt(x * x + y * y + z * z)) * c;
            }
          }
        }
        if (bc.empty()) continue;
        Frame fr = make_frame(Vec3{xi[0] / xn, xi[1] / xn, xi[2] / xn});
        cd acc = 0.0;
        const std::size_t m = bc.size();
        for (std::size_t it = 0; it < aq.n_theta(); ++it)
          for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
            Vec3 sg = aq.sigma(fr, it, ip);
            const double mx = 0.5 * (xi[0] - xn * sg[0]);
            const double my = 0.5 * (xi[1] - xn * sg[1]);
            const double mz = 0.5 * (xi[2] - xn * sg[2]);
            cd gain = 0.0;
            for (std::size_t q = 0; q < m; ++q) {
              double dx = bx[q] - mx, dy = by[q] - my, dz = bz[q] - mz;
              gain += phat(std::sqrt(dx * dx + dy * dy + dz * dz)) * bc[q];
            }
            acc += aq.w_theta[it] * aq.w_phi * (gain - loss);
          }
        Qh[g.idx(a0, a1, a2)] = C * acc;
      }
  return g.inverse(Qh);
}

// Maxwell surrogate (kinetic factor 1): Qhat(xi) = int b [fhat(xi-) ghat(xi+) - fhat(0) ghat(xi)].
std::vector<cd> fourier_pair_maxwell(const VelocityGrid& g, const std::vector<cd>& f,
                                     const std::vector<cd>& gg, const AngularQuadrature& aq) {
  const int n = g.n();
  const auto gh = g.forward(gg);
  std::vector<cd> e0(n), e1(n), e2(n);
  const double zero[3] = {0, 0, 0};
  const cd f0 = eval_hat(g, f, zero, e0, e1, e2);
  std::vector<cd> Qh(g.size(), cd(0));
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2) {
        const double xi[3] = {g.xi(a0), g.xi(a1), g.xi(a2)};
        const double xn = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        if (xn == 0.0) continue;
        Frame fr = make_frame(Vec3{xi[0] / xn, xi[1] / xn, xi[2] / xn});
        const cd gx = gh[g.idx(a0, a1, a2)];
        cd acc = 0.0;
        for (std::size_t it = 0; it < aq.n_theta(); ++it)
          for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
            Vec3 sg = aq.sigma(fr, it, ip);
            double m[3], p[3];
            for (int d = 0; d < 3; ++d) {
              m[d] = 0.5 * (xi[d] - xn * sg[d]);
              p[d] = xi[d] - m[d];
            }
            cd term = eval_hat(g, f, m, e0, e1, e2) * eval_hat(g, gg, p, e0, e1, e2) - f0 * gx;
            acc += aq.w_theta[it] * aq.w_phi * term;
          }
        Qh[g.idx(a0, a1, a2)] = acc;
      }
  return g.inverse(Qh);
}

}  // namespace

DistributionField q_fourier(const DistributionField& f, const DistributionField& g,
                            const KernelParams& kp, const SplitParams& sp,
                            const AngularQuadrature& aq, KineticFactor phi) {
  if (phi == KineticFactor::Full || phi == KineticFactor::TailR)
    throw UnsupportedPath("q_fourier: the kinetic factor has no integrable transform");
  require_same_grid(f.grid, g.grid, "q_fourier");
  kp.validate();
  sp.validate();
  const VelocityGrid& grid = f.grid;
  int ext = 0;
  for (const auto* x : {&f, &g})
    for (const auto& [l, v] : x->modes)
      ext = std::max({ext, std::abs(l[0]), std::abs(l[1]), std::abs(l[2])});
  DistributionField out(grid);
  for (const auto& [l1, a] : f.modes)
    for (const auto& [l2, b] : g.modes) {
      Mode l{l1[0] + l2[0], l1[1] + l2[1], l1[2] + l2[2]};
      if (std::abs(l[0]) > ext || std::abs(l[1]) > ext || std::abs(l[2]) > ext) continue;
      std::vector<cd> fa(a.data(), a.data() + a.size()), gb(b.data(), b.data() + b.size());
      auto q = phi == KineticFactor::CutR ? fourier_pair_cut(grid, fa, gb, kp, sp, aq)
                                          : fourier_pair_maxwell(grid, fa, gb, aq);
      out[l] += Eigen::Map<Eigen::VectorXcd>(q.data(), q.size());
    }
  return out;
}

}  // namespace kgap
