#pragma once
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kgap/collision.hpp"
#include "kgap/field.hpp"

namespace kgap {

enum class WeightTag { Gaussian, Polynomial, Unweighted };
std::string to_string(WeightTag t);
WeightTag weight_tag_from(const std::string& s);

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense operator over the flattened velocity nodes at one torus mode.
// In terms of the Gaussian-weighted operator Lg: a = diag(scale) Lg diag(1/scale), so every
// convention shares the spectrum of the Gaussian one.
struct OperatorMatrix {
  Eigen::MatrixXcd a;
  Mode ell{0, 0, 0};
  WeightTag tag = WeightTag::Gaussian;
  double k = 0.0;
  Eigen::VectorXd scale;
  std::string label;
  Eigen::Index rows() const { return a.rows(); }
};

// Which part of the kernel a collision (|u|, theta) belongs to; -1 drops it.
using CollisionClass = std::function<int(double r, double theta)>;

struct AssemblyOptions {
  int max_n = 12;
  CollisionOptions phi{};  // kinetic factor used for the weight
};

// Symmetric weak form in Gaussian coordinates h = f / sqrt(mu):
//   Lg = -1/2 sum_{u > 0, sigma, v} W c c^T,  c = sqrt(mu mu*) (e' + e'_* - e - e_*) / sqrt(mu)
// with off-grid points read through the 27-point quadratic Lagrange stencil. Each class gets
// its own matrix. nu (optional) collects the collision frequency sum W mu(v*) per class.
std::vector<Eigen::MatrixXd> weak_gaussian_matrices(const VelocityGrid& grid,
                                                    const KernelParams& kp,
                                                    const AngularQuadrature& aq,
                                                    const CollisionClass& cls, int n_class,
                                                    const AssemblyOptions& opt = {},
                                                    std::vector<Eigen::VectorXd>* nu = nullptr);

// Matrix-free action of the same weak operator on f (f-coordinates: Lf = mu^(1/2) Lg mu^(-1/2) f).
Eigen::VectorXcd apply_L(const VelocityGrid& grid, const KernelParams& kp,
                         const AngularQuadrature& aq, const Eigen::VectorXcd& f,
                         const CollisionOptions& phi = {});

// Diagonal scaling from Gaussian coordinates to the requested convention.
Eigen::VectorXd weight_scale(const VelocityGrid& grid, WeightTag tag, double k);

// Wrap a Gaussian-coordinate matrix into the requested convention and add transport
// 2 pi i (l . v) at mode l.
OperatorMatrix make_operator(const VelocityGrid& grid, const Eigen::MatrixXd& Lg, WeightTag tag,
                             double k, const Mode& ell, const std::string& label);

OperatorMatrix assemble_L(const VelocityGrid& grid, const KernelParams& kp,
                          const AngularQuadrature& aq, WeightTag tag = WeightTag::Gaussian,
                          double k = 0.0, const Mode& ell = {0, 0, 0},
                          const AssemblyOptions& opt = {});

// Add 2 pi i (l . v) on the diagonal.
void add_transport(const VelocityGrid& grid, const Mode& ell, Eigen::MatrixXcd& a);

struct DecompositionParams {
  double delta = 0.1;
  double eps = 0.1;
  double k = 10.0;
  void validate() const;
  // Angular breakpoint: b1 = b on theta >= theta_eps, b2 = b on theta < theta_eps.
  double theta_eps() const;
  // Phi1 = Phi on delta <= |u| <= 1/delta, Phi2 the rest.
  bool in_phi1(double r) const { return r >= delta && r <= 1.0 / delta; }
};

struct Decomposition {
  OperatorMatrix first;   // K or A
  OperatorMatrix second;  // Lambda or B
  Eigen::MatrixXd L;      // Gaussian-coordinate L used for the reconstruction
  double reconstruction_defect = 0.0;  // relative
};

// K = L_{Phi1,b1} + nu_{Phi1,b1},  Lambda = nu_{Phi1,b1} - L_{Phi2,b1} - L_{Phi,b2}.
Decomposition decompose_gaussian(const VelocityGrid& grid, const KernelParams& kp,
                                 const AngularQuadrature& aq, const DecompositionParams& dp,
                                 const AssemblyOptions& opt = {});

// A = L_{Phi1,b1} + nu_{Phi1,b1}, B = A - L (the K / Lambda partition) in the <v>^k weight.
Decomposition decompose_polynomial(const VelocityGrid& grid, const KernelParams& kp,
                                   const AngularQuadrature& aq, const DecompositionParams& dp,
                                   const AssemblyOptions& opt = {});

struct Spectrum {
  Eigen::VectorXcd values;   // sorted by real part, largest first
  Eigen::MatrixXcd vectors;  // columns, in the operator's own convention
  std::vector<bool> cluster;
  int cluster_dim = 0;
  double tol = 0.0;
  double residual = 0.0;     // measured |L psi| / |psi| on the invariant directions
  double gap = 0.0;          // -max Re over non-cluster eigenvalues
  double principal_angle = 0.0;  // cluster span vs span{mu, v mu, |v|^2 mu} (radians)
  double hermitian_defect = 0.0;
  double max_imag = 0.0;     // largest |Im| (relevant for Hermitian cases)
};

Spectrum spectrum(const VelocityGrid& grid, const OperatorMatrix& op, bool want_vectors = true);

// Relative Hermiticity defect |A - A^H| / |A|.
double hermitian_defect(const Eigen::MatrixXcd& a);

}  // namespace kgap
