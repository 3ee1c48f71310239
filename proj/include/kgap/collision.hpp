#pragma once

#include <functional>
#include <utility>

#include "kgap/field.hpp"
#include "kgap/interp.hpp"

namespace kgap {

// Smooth cutoff chi_R: 1 on [0, R], 0 on [2R, inf), C-infinity in between.
struct SplitParams {
  double R = 2.0;
  void validate() const;
  double chi(double r) const;
};

enum class KineticFactor {
  Full,     // |u|^gamma
  Maxwell,  // 1 (the gamma = 0 surrogate)
  CutR,     // |u|^gamma chi_R(|u|)
  TailR,    // |u|^gamma (1 - chi_R(|u|))
};

struct CollisionOptions {
  KineticFactor phi = KineticFactor::Full;
  SplitParams sp{};
  // Remove the discrete moment defect so {1, v, |v|^2} are conserved to roundoff.
  bool conservative = true;
};

double kinetic_factor(const KernelParams& kp, const CollisionOptions& opt, double r);

// Largest |u| with a nonzero kinetic factor (negative when unbounded).
double kinetic_support(const CollisionOptions& opt);

// Strong-form Q(f, g): f sits at v*, g at v. Post-collision values are read through the
// Maxwellian-modulated cubic interpolant f(x) = mu(x) I[f/mu](x).
DistributionField q_direct(const DistributionField& f, const DistributionField& g,
                           const KernelParams& kp, const AngularQuadrature& aq,
                           const CollisionOptions& opt = {});

// Single mode version; f and g given as values on the nodes.
Eigen::VectorXd q_direct_real(const VelocityGrid& grid, const Eigen::VectorXd& f,
                              const Eigen::VectorXd& g, const KernelParams& kp,
                              const AngularQuadrature& aq, const CollisionOptions& opt = {});
Eigen::VectorXcd q_direct_complex(const VelocityGrid& grid, const Eigen::VectorXcd& f,
                                  const Eigen::VectorXcd& g, const KernelParams& kp,
                                  const AngularQuadrature& aq, const CollisionOptions& opt = {});

// (Q_R, Q_Rbar) accumulated inside one sweep.
std::pair<DistributionField, DistributionField> q_split(const DistributionField& f,
                                                        const DistributionField& g,
                                                        const KernelParams& kp,
                                                        const SplitParams& sp,
                                                        const AngularQuadrature& aq,
                                                        bool conservative = true);

// Bobylev form for the bounded kinetic factors (CutR or Maxwell). Throws for Full/TailR.
DistributionField q_fourier(const DistributionField& f, const DistributionField& g,
                            const KernelParams& kp, const SplitParams& sp,
                            const AngularQuadrature& aq,
                            KineticFactor phi = KineticFactor::CutR);

// Trigonometric-polynomial value fhat(xi) = h^3 sum_j f_j exp(-i v_j . xi) at any xi.
// e0, e1, e2 are scratch vectors of length n.
cd eval_hat(const VelocityGrid& g, const std::vector<cd>& f, const double xi[3],
            std::vector<cd>& e0, std::vector<cd>& e1, std::vector<cd>& e2);

struct UnsupportedPath : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kgap
