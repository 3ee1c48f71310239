#pragma once
#include <Eigen/Dense>
#include <utility>

#include "kgap/collision.hpp"
#include "kgap/field.hpp"

namespace kgap {

struct NormSpec {
  double beta = 0.0;  // Sobolev order, may be negative
  double k = 0.0;     // weight order
};

// || <D>^beta (<v>^k f) ||_2, with <D> the lattice-frequency multiplier <xi>.
double weighted_sobolev(const VelocityGrid& g, const Eigen::VectorXcd& f, const NormSpec& spec);
double weighted_sobolev(const DistributionField& f, const NormSpec& spec);
// The other ordering, || <v>^k <D>^beta f ||_2.
double sobolev_weighted(const VelocityGrid& g, const Eigen::VectorXcd& f, const NormSpec& spec);

// Plain discrete L2 norm sqrt(sum |f|^2 h^3).
double l2(const VelocityGrid& g, const Eigen::VectorXcd& f);

// Polynomial weight W = <v>^m0.
struct YNorm {
  double l = 3.0;
  double m0 = 2.0;
};

// sqrt( sum_{|alpha| <= 2} sum_l || W^(l - |alpha|) (2 pi l)^alpha f_l ||^2 ).
double y_l_norm(const DistributionField& f, const YNorm& y);

// How f(v') is read off the lattice: plain cubic convolution, or cubic convolution of f/mu
// multiplied back by mu(v') (accurate for fields with Gaussian tails, as in q_direct).
enum class InterpRule { Plain, Modulated };

// J1 = sum b Phi mu(v*) |f(v') - f(v)|^2 over the lattice. Phi is |u|^gamma (Full) or 1 (Maxwell).
double j1_functional(const VelocityGrid& g, const Eigen::VectorXcd& f, const KernelParams& kp,
                     const AngularQuadrature& aq, KineticFactor phi = KineticFactor::Full,
                     InterpRule rule = InterpRule::Plain);

// C0(F, g) = sum b F(v*) |g(v') - g(v)|^2 (no kinetic factor).
double c0_functional(const VelocityGrid& grid, const Eigen::VectorXd& F, const Eigen::VectorXcd& g,
                     const AngularQuadrature& aq, InterpRule rule = InterpRule::Plain);

// Fourier-side expression of J1 with Phi = 1 for F = mu:
// (2 pi)^-3 sum_xi sum_sigma b [ Fhat(0) |ghat(xi) - ghat(xi+)|^2
//                               + 2 Re((Fhat(0) - Fhat(xi-)) ghat(xi+) conj(ghat(xi))) ].
double j1_fourier(const VelocityGrid& grid, const Eigen::VectorXd& F, const Eigen::VectorXcd& g,
                  const AngularQuadrature& aq);

// D(F) = - sum Q(F, F) log F h^3 for F > 0.
double entropy_dissipation(const VelocityGrid& g, const Eigen::VectorXd& F, const KernelParams& kp,
                           const AngularQuadrature& aq);

// sum F |log F| h^3 for F > 0 (diagnostic).
double l_log_l(const VelocityGrid& g, const Eigen::VectorXd& F);

std::pair<Eigen::VectorXd, Eigen::VectorXd> pos_neg_parts(const Eigen::VectorXd& h);

// Gagliardo form c_{3,s} sum_{x != y} |h(y) - h(x)|^2 / |y - x|^(3 + 2s) h^6, with h = 0
// outside the box (the outside lattice is summed through a lattice zeta constant).
double gagliardo_seminorm2(const VelocityGrid& g, const Eigen::VectorXd& h, double s);
// ||h||_2^2 + Gagliardo seminorm squared.
double hs_norm2_gagliardo(const VelocityGrid& g, const Eigen::VectorXd& h, double s);

}  // namespace kgap
