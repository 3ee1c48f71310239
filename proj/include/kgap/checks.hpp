#pragma once
#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "kgap/collision.hpp"
#include "kgap/report.hpp"

namespace kgap {

// amp * exp(-|v - center|^2 / (2 var)); var = inf means the constant amp.
struct GaussianBump {
  Vec3 center{0.0, 0.0, 0.0};
  double var = 1.0;
  double amp = 1.0;
  bool constant() const { return std::isinf(var); }
  double operator()(const Vec3& v) const;
  // Average over the unit sphere times 4 pi: int_{S^2} G(p + rho w) dw.
  double sphere(const Vec3& p, double rho) const;
  GaussianBump squared() const;
  // Closed-form transform int G(v) exp(-i v.xi) dv.
  cd hat(const Vec3& xi) const;
};

struct RadialRule {
  int panels = 48;
  int order = 16;
};

// int int int b Phi f(v*) (g(v')^2 - g(v)^2) against int (S * f) g^2, S the regular
// change-of-variables kernel. f is given on the lattice (outer sum), the inner integrals are
// radial quadratures of closed-form sphere averages.
EstimateReport cancellation_check(const VelocityGrid& grid, const Eigen::VectorXd& f,
                                  const GaussianBump& g, const KernelParams& kp,
                                  const AngularQuadrature& aq, double tol = 1e-4,
                                  const RadialRule& rr = {});

// Regular (v -> v' at fixed v*) and singular (v* -> v' at fixed v) identities for a Gaussian F.
EstimateReport change_of_variables_check(const GaussianBump& F, const Vec3& fixed_point,
                                         const KernelParams& kp, const AngularQuadrature& aq,
                                         bool singular, double tol, const RadialRule& rr = {});

// Physical J1 with Phi = 1 and F = mu (lattice sums with exact values of g) against the
// Fourier-side expression (closed-form transforms on a xi lattice).
EstimateReport j1_fourier_identity(const VelocityGrid& grid, const GaussianBump& g,
                                   const AngularQuadrature& aq, double tol = 1e-3);

// Symmetrized weak form of Q(f, f) against the five invariants, with the test functions
// evaluated exactly at v' and v*' (no interpolation):
// 1/2 sum b Phi f(v) f(v*) [psi(v') + psi(v*') - psi(v) - psi(v*)] h^6.
Eigen::VectorXd weak_invariant_moments(const VelocityGrid& grid, const Eigen::VectorXd& f,
                                       const KernelParams& kp, const AngularQuadrature& aq,
                                       const CollisionOptions& opt = {});

// Weak moments of Q(f, f) against ||f||_2^2, plus the strong-form defects as diagnostics.
EstimateReport conservation_check(const VelocityGrid& grid, const Eigen::VectorXd& f,
                                  const KernelParams& kp, const AngularQuadrature& aq,
                                  double tol = 1e-8);
// ||Q(mu, mu)|| / ||mu|| from the strong form without the moment correction.
EstimateReport equilibrium_check(const VelocityGrid& grid, const KernelParams& kp,
                                 const AngularQuadrature& aq, double tol = 1e-6);

// Three smooth (f, g) pairs: two Maxwellian-times-polynomial fields, a shifted Maxwellian
// and a narrower bump.
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> smooth_pairs(const VelocityGrid& g);

struct CrossOracleParams {
  double Lv = 8.0;
  int n_coarse = 16;
  int n_fine = 32;  // 0 skips the refinement level
  double tol = 1e-3;
  double min_ratio = 2.0;
};
// q_fourier against q_direct on Q_R (kinetic factor |u|^gamma chi_R).
EstimateReport cross_oracle_check(const KernelParams& kp, const SplitParams& sp, int n_theta,
                                  int n_phi, const CrossOracleParams& cp);

}  // namespace kgap
