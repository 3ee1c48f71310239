#include "kgap/grids.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fftw3.h>

namespace kgap {

void KernelParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("s must lie in (0, 1)");
  if (!(b0 > 0.0)) throw InvalidArgument("b0 must be positive");
  if (!(theta_min > 0.0 && theta_min < theta_max))
    throw InvalidArgument("theta_min must lie in (0, pi/2)");
}

double KernelParams::b_sin(double theta) const {
  if (theta <= 0.0 || theta > theta_max) return 0.0;
  return b0 * std::pow(theta, -1.0 - 2.0 * s);
}

VelocityGrid::VelocityGrid(double Lv, int n) : Lv_(Lv), n_(n), h_(2.0 * Lv / n) {
  axis_.resize(n);
  for (int i = 0; i < n; ++i) axis_[i] = x(i);
}

std::array<int, 3> VelocityGrid::ijk(std::size_t p) const {
  int k = static_cast<int>(p % n_);
  p /= n_;
  int j = static_cast<int>(p % n_);
  int i = static_cast<int>(p / n_);
  return {i, j, k};
}

Vec3 VelocityGrid::node(std::size_t p) const {
  auto [i, j, k] = ijk(p);
  return {axis_[i], axis_[j], axis_[k]};
}

namespace {

struct Plan {
  fftw_complex* in;
  fftw_complex* out;
  fftw_plan plan;
  Plan(int n, int sign) {
    std::size_t N = static_cast<std::size_t>(n) * n * n;
    in = fftw_alloc_complex(N);
    out = fftw_alloc_complex(N);
    plan = fftw_plan_dft_3d(n, n, n, in, out, sign, FFTW_ESTIMATE);
  }
  ~Plan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

}  // namespace

std::vector<cd> VelocityGrid::forward(const std::vector<cd>& f) const {
  if (f.size() != size()) throw InvalidArgument("forward: field size does not match grid");
  const int n = n_;
  Plan p(n, FFTW_FORWARD);
  std::copy(f.begin(), f.end(), reinterpret_cast<cd*>(p.in));
  fftw_execute(p.plan);
  const cd* F = reinterpret_cast<const cd*>(p.out);
  std::vector<cd> phase(n);
  const double x0 = x(0);
  for (int a = 0; a < n; ++a) phase[a] = std::polar(1.0, -x0 * xi(a));
  std::vector<cd> out(size());
  const double c = cell();
  for (int a = 0; a < n; ++a) {
    int ka = ((a - n / 2) % n + n) % n;
    for (int b = 0; b < n; ++b) {
      int kb = ((b - n / 2) % n + n) % n;
      for (int d = 0; d < n; ++d) {
        int kd = ((d - n / 2) % n + n) % n;
        out[idx(a, b, d)] = c * phase[a] * phase[b] * phase[d] * F[idx(ka, kb, kd)];
      }
    }
  }
  return out;
}

std::vector<cd> VelocityGrid::inverse(const std::vector<cd>& fhat) const {
  if (fhat.size() != size()) throw InvalidArgument("inverse: field size does not match grid");
  const int n = n_;
  Plan p(n, FFTW_BACKWARD);
  cd* G = reinterpret_cast<cd*>(p.in);
  std::vector<cd> phase(n);
  const double x0 = x(0);
  for (int a = 0; a < n; ++a) phase[a] = std::polar(1.0, x0 * xi(a));
  for (int a = 0; a < n; ++a) {
    int ka = ((a - n / 2) % n + n) % n;
    for (int b = 0; b < n; ++b) {
      int kb = ((b - n / 2) % n + n) % n;
      for (int d = 0; d < n; ++d) {
        int kd = ((d - n / 2) % n + n) % n;
        G[idx(ka, kb, kd)] = phase[a] * phase[b] * phase[d] * fhat[idx(a, b, d)];
      }
    }
  }
  fftw_execute(p.plan);
  const double scale = 1.0 / std::pow(n * h_, 3);
  const cd* out = reinterpret_cast<const cd*>(p.out);
  std::vector<cd> f(size());
  for (std::size_t q = 0; q < size(); ++q) f[q] = scale * out[q];
  return f;
}

VelocityGrid build_grid(double Lv, int n) {
  if (!(Lv > 0.0)) throw InvalidArgument("grid: Lv must be positive");
  if (n < 4) throw InvalidArgument("grid: n must be at least 4");
  if (n % 2 != 0) throw InvalidArgument("grid: n must be even");
  return VelocityGrid(Lv, n);
}

Frame make_frame(const Vec3& uhat) {
  int a = 0;
  for (int d = 1; d < 3; ++d)
    if (std::abs(uhat[d]) < std::abs(uhat[a])) a = d;
  Vec3 e1{0.0, 0.0, 0.0};
  e1[a] = 1.0;
  double c = uhat[a];
  for (int d = 0; d < 3; ++d) e1[d] -= c * uhat[d];
  double r = std::sqrt(norm2(e1));
  for (double& x : e1) x /= r;
  Vec3 e2{uhat[1] * e1[2] - uhat[2] * e1[1], uhat[2] * e1[0] - uhat[0] * e1[2],
          uhat[0] * e1[1] - uhat[1] * e1[0]};
  return {uhat, e1, e2};
}

Vec3 AngularQuadrature::sigma(const Frame& fr, std::size_t it, std::size_t ip) const {
  const double ct = std::cos(theta[it]), st = std::sin(theta[it]);
  const double cp = cphi[ip], sp = sphi[ip];
  Vec3 out;
  for (int d = 0; d < 3; ++d) out[d] = ct * fr.u[d] + st * (cp * fr.e1[d] + sp * fr.e2[d]);
  return out;
}

void gauss_legendre(int q, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int i = 1; i < q; ++i) {
    double beta = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = beta;
    J(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(q);
  w.resize(q);
  for (int i = 0; i < q; ++i) {
    double t = es.eigenvalues()(i);
    double v0 = es.eigenvectors()(0, i);
    x[i] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    w[i] = (b - a) * v0 * v0;
  }
}

AngularQuadrature build_angular(const KernelParams& kp, int n_theta, int n_phi,
                                const std::vector<double>& breakpoints) {
  kp.validate();
  if (n_phi < 2 || n_phi % 2 != 0) throw InvalidArgument("angular: n_phi must be even and >= 2");
  if (n_theta < 2) throw InvalidArgument("angular: n_theta must be >= 2");

  const double t0 = kp.theta_min, t1 = KernelParams::theta_max;
  int P = std::max(1, n_theta / 4);
  std::vector<double> edges;
  for (int k = 0; k <= P; ++k) edges.push_back(t0 * std::pow(t1 / t0, double(k) / P));
  edges.back() = t1;
  for (double b : breakpoints)
    if (b > t0 * (1 + 1e-12) && b < t1 * (1 - 1e-12)) edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12 * b; }),
              edges.end());
  const int panels = static_cast<int>(edges.size()) - 1;
  if (n_theta < panels) throw InvalidArgument("angular: n_theta smaller than the panel count");

  // On each panel integrate in y = theta^(2-2s), so b sin(theta) theta^2 dtheta is exact.
  AngularQuadrature aq;
  aq.kp = kp;
  const double p = 2.0 - 2.0 * kp.s;
  for (int k = 0; k < panels; ++k) {
    int q = n_theta / panels + (k < n_theta % panels ? 1 : 0);
    std::vector<double> y, wy;
    gauss_legendre(q, std::pow(edges[k], p), std::pow(edges[k + 1], p), y, wy);
    for (int i = 0; i < q; ++i) {
      double th = std::pow(y[i], 1.0 / p);
      aq.theta.push_back(th);
      aq.w_theta.push_back(wy[i] * kp.b0 / (p * th * th));
    }
  }
  aq.w_phi = 2.0 * kPi / n_phi;
  for (int j = 0; j < n_phi; ++j) aq.phi.push_back(2.0 * kPi * j / n_phi);
  aq.cphi.resize(n_phi);
  aq.sphi.resize(n_phi);
  for (int j = 0; j < n_phi / 2; ++j) {
    aq.cphi[j] = std::cos(aq.phi[j]);
    aq.sphi[j] = std::sin(aq.phi[j]);
    aq.cphi[j + n_phi / 2] = -aq.cphi[j];
    aq.sphi[j + n_phi / 2] = -aq.sphi[j];
  }
  return aq;
}

bool TorusModes::contains(const Mode& l) const {
  return std::abs(l[0]) <= Lx && std::abs(l[1]) <= Lx && std::abs(l[2]) <= Lx;
}

TorusModes build_modes(int Lx) {
  if (Lx < 0) throw InvalidArgument("modes: Lx must be nonnegative");
  TorusModes tm;
  tm.Lx = Lx;
  for (int a = -Lx; a <= Lx; ++a)
    for (int b = -Lx; b <= Lx; ++b)
      for (int c = -Lx; c <= Lx; ++c) tm.modes.push_back({a, b, c});
  return tm;
}

}  // namespace kgap
