#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgap {

using cd = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Mode = std::array<int, 3>;

constexpr double kPi = std::numbers::pi;

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Blow-up, non-decay or non-convergence detected during a computation.
struct NumericalAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cross-section b(cos theta)|v - v*|^gamma with b(cos theta) sin(theta) = b0 theta^(-1-2s)
// on [theta_min, pi/2].
struct KernelParams {
  double gamma = 1.0;
  double s = 0.5;
  double b0 = 1.0;
  double theta_min = 1e-3;
  static constexpr double theta_max = kPi / 2;

  void validate() const;
  // b(cos theta) sin(theta); zero outside (0, pi/2].
  double b_sin(double theta) const;
};

class VelocityGrid {
 public:
  VelocityGrid() = default;
  VelocityGrid(double Lv, int n);

  double Lv() const { return Lv_; }
  int n() const { return n_; }
  double h() const { return h_; }
  double cell() const { return h_ * h_ * h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  double x(int i) const { return -Lv_ + (i + 0.5) * h_; }
  const std::vector<double>& axis() const { return axis_; }
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  std::array<int, 3> ijk(std::size_t p) const;
  Vec3 node(std::size_t p) const;
  // Continuous index coordinate of a velocity component.
  double coord(double v) const { return (v + Lv_) / h_ - 0.5; }

  // Dual lattice: xi_m = m * dxi, m in [-n/2, n/2), stored in centred order.
  double dxi() const { return kPi / Lv_; }
  double xi(int a) const { return (a - n_ / 2) * dxi(); }

  // fhat(xi) = h^3 sum_j f_j exp(-i v_j . xi) on the dual lattice, and its exact inverse.
  std::vector<cd> forward(const std::vector<cd>& f) const;
  std::vector<cd> inverse(const std::vector<cd>& fhat) const;

  bool operator==(const VelocityGrid& o) const { return Lv_ == o.Lv_ && n_ == o.n_; }

 private:
  double Lv_ = 0.0;
  int n_ = 0;
  double h_ = 0.0;
  std::vector<double> axis_;
};

VelocityGrid build_grid(double Lv, int n);

// Orthonormal frame (uhat, e1, e2). e1 depends on uhat only through uhat up to sign,
// so the frame of -uhat is (-uhat, e1, -e2).
struct Frame {
  Vec3 u, e1, e2;
};
Frame make_frame(const Vec3& uhat);

struct AngularQuadrature {
  KernelParams kp;
  std::vector<double> theta;
  // w_theta[i] integrates b(cos theta) sin(theta) F(theta) d theta (kernel included).
  std::vector<double> w_theta;
  std::vector<double> phi;
  // cos/sin of phi; the second half is the exact negation of the first (antipodal pairs).
  std::vector<double> cphi, sphi;
  double w_phi = 0.0;

  std::size_t n_theta() const { return theta.size(); }
  std::size_t n_phi() const { return phi.size(); }
  std::size_t size() const { return theta.size() * phi.size(); }
  // Unit sigma for node (it, ip) in the frame of uhat.
  Vec3 sigma(const Frame& fr, std::size_t it, std::size_t ip) const;
};

// Geometric panels on [theta_min, pi/2]; each extra breakpoint becomes a panel boundary.
AngularQuadrature build_angular(const KernelParams& kp, int n_theta, int n_phi,
                                const std::vector<double>& breakpoints = {});

struct TorusModes {
  int Lx = 0;
  std::vector<Mode> modes;

  bool contains(const Mode& l) const;
};
TorusModes build_modes(int Lx);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int q, double a, double b, std::vector<double>& x, std::vector<double>& w);

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double japan(double r2) { return std::sqrt(1.0 + r2); }

}  // namespace kgap
