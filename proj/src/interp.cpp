#include "kgap/interp.hpp"

#include <algorithm>

namespace kgap {

namespace {

double keys_w(double x) {
  x = std::abs(x);
  if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
  if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
  return 0.0;
}

}  // namespace

Stencil<4> keys_stencil(double t) {
  Stencil<4> st;
  double f = std::floor(t);
  double tau = t - f;
  st.off = static_cast<int>(f) - 1;
  st.w[0] = keys_w(tau + 1.0);
  st.w[1] = keys_w(tau);
  st.w[2] = keys_w(1.0 - tau);
  st.w[3] = keys_w(2.0 - tau);
  return st;
}

Stencil<3> quad_stencil(double t) {
  Stencil<3> st;
  double c = std::nearbyint(t);
  double tau = t - c;
  st.off = static_cast<int>(c) - 1;
  st.w[0] = 0.5 * tau * (tau - 1.0);
  st.w[1] = 1.0 - tau * tau;
  st.w[2] = 0.5 * tau * (tau + 1.0);
  return st;
}

template <int S>
static Stencil<S> make_stencil(double t) {
  if constexpr (S == 4)
    return keys_stencil(t);
  else
    return quad_stencil(t);
}

template <int S>
void sweep(const VelocityGrid& g, const AngularQuadrature& aq, const SweepOptions& opt,
           const std::function<void(const CollisionBlock<S>&)>& fn) {
  const int n = g.n();
  const double h = g.h();
  CollisionBlock<S> blk;
  for (int a = -(n - 1); a <= n - 1; ++a)
    for (int b = -(n - 1); b <= n - 1; ++b)
      for (int c = -(n - 1); c <= n - 1; ++c) {
        if (a == 0 && b == 0 && c == 0 && !opt.include_zero) continue;
        if (opt.half) {
          bool pos = a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
          if (!pos) continue;
        }
        const int du[3] = {a, b, c};
        const double r = h * std::sqrt(double(a * a + b * b + c * c));
        if (opt.r_max > 0.0 && r > opt.r_max) continue;
        Frame fr;
        if (r > 0.0) {
          fr = make_frame(Vec3{a * h / r, b * h / r, c * h / r});
        } else {
          fr = make_frame(Vec3{0.0, 0.0, 1.0});
        }
        for (int d = 0; d < 3; ++d) blk.du[d] = du[d];
        blk.r = r;
        for (std::size_t it = 0; it < aq.n_theta(); ++it)
          for (std::size_t ip = 0; ip < aq.n_phi(); ++ip) {
            Vec3 sg = aq.sigma(fr, it, ip);
            bool ok = true;
            for (int d = 0; d < 3 && ok; ++d) {
              double t = (r * sg[d] - h * du[d]) / (2.0 * h);
              blk.gain[d] = make_stencil<S>(t);
              blk.star[d] = make_stencil<S>(-t);
              blk.star[d].off -= du[d];
              // The inside-grid test uses a guard centred on the nearest node, so it does
              // not depend on the sign of a small shift (antipodal partners agree).
              const int gw = S == 4 ? 2 : 1;
              const int cg = static_cast<int>(std::nearbyint(t));
              const int cs = static_cast<int>(std::nearbyint(-t)) - du[d];
              int lo = std::max({0, du[d], gw - cg, gw - cs});
              int hi = std::min({n - 1, n - 1 + du[d], n - 1 - gw - cg, n - 1 - gw - cs});
              blk.box.lo[d] = lo;
              blk.box.hi[d] = hi;
              ok = lo <= hi;
            }
            if (!ok) continue;
            blk.sigma = sg;
            blk.it = it;
            blk.ip = ip;
            blk.theta = aq.theta[it];
            blk.wang = aq.w_theta[it] * aq.w_phi * g.cell();
            fn(blk);
          }
      }
}

template void sweep<4>(const VelocityGrid&, const AngularQuadrature&, const SweepOptions&,
                       const std::function<void(const CollisionBlock<4>&)>&);
template void sweep<3>(const VelocityGrid&, const AngularQuadrature&, const SweepOptions&,
                       const std::function<void(const CollisionBlock<3>&)>&);

void outer3(const Box& box, const std::vector<double>& a0, const std::vector<double>& a1,
            const std::vector<double>& a2, std::vector<double>& out) {
  out.resize(box.size());
  std::size_t q = 0;
  for (int i = box.lo[0]; i <= box.hi[0]; ++i)
    for (int j = box.lo[1]; j <= box.hi[1]; ++j) {
      const double p = a0[i] * a1[j];
      for (int k = box.lo[2]; k <= box.hi[2]; ++k) out[q++] = p * a2[k];
    }
}

bool keys_point(const VelocityGrid& g, const double* A, const Vec3& v, double& out) {
  const int n = g.n();
  Stencil<4> st[3];
  int base[3];
  for (int d = 0; d < 3; ++d) {
    double p = g.coord(v[d]);
    st[d] = keys_stencil(p);
    base[d] = st[d].off;
    if (base[d] < 0 || base[d] + 3 > n - 1) return false;
  }
  double acc = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double* row = A + (static_cast<std::size_t>(base[0] + a) * n + base[1] + b) * n + base[2];
      double s = 0.0;
      for (int c = 0; c < 4; ++c) s += st[2].w[c] * row[c];
      acc += st[0].w[a] * st[1].w[b] * s;
    }
  out = acc;
  return true;
}

}  // namespace kgap
