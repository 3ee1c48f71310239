#pragma once
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kgap/estimates.hpp"
#include "kgap/linearized.hpp"
#include "kgap/norms.hpp"
#include "kgap/report.hpp"

namespace kgap {

enum class Integrator { RK4, Exponential };
std::string to_string(Integrator i);
Integrator integrator_from(const std::string& s);

struct EvolutionConfig {
  double dt = 0.1;
  double t_end = 5.0;
  Integrator integrator = Integrator::Exponential;
  YNorm y{3.0, 2.5};  // m0 > max{4s, 1}
  double k_weight = 4.0;  // <v>^k weight for |h - pi h0|
  int k0 = 22;
  double T0 = 0.5;
  MultiplierSymbol multiplier{};
  bool multiplier_diagnostics = false;
  int picard_max = 40;
  double picard_tol = 1e-10;  // relative size of the last Picard difference
  double eps0 = 1e-2;         // admissible |f0|_{Y_l}
  double growth_abort = 10.0;
  void validate() const;
  int steps() const;
};

// Generators L - 2 pi i (l . v) in Gaussian coordinates h = f / sqrt(mu), one per torus
// mode, with cached propagators exp(t A_l).
class LinearModel {
 public:
  LinearModel(const VelocityGrid& g, Eigen::MatrixXd Lg);
  static LinearModel assemble(const VelocityGrid& g, const KernelParams& kp,
                              const AngularQuadrature& aq, const AssemblyOptions& opt = {});

  const VelocityGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& Lg() const { return Lg_; }
  const Eigen::VectorXd& sqrt_mu() const { return sqrt_mu_; }
  Eigen::MatrixXcd generator(const Mode& l) const;
  const Eigen::MatrixXcd& propagator(const Mode& l, double t) const;
  double spectral_radius() const { return radius_; }
  double gap() const { return gap_; }
  int cluster_dim() const { return cluster_; }
  // Largest real part of the spectrum at mode l, the five conserved directions excluded at
  // l = 0 (power iteration on exp(2 A_l) otherwise).
  double abscissa(const Mode& l) const;

 private:
  VelocityGrid grid_;
  Eigen::MatrixXd Lg_;
  Eigen::VectorXd sqrt_mu_;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
  double radius_ = 0.0, gap_ = 0.0;
  int cluster_ = 0;
  mutable std::map<std::pair<Mode, double>, Eigen::MatrixXcd> cache_;
  mutable std::map<Mode, double> abscissa_;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> y_norm;       // |f(t)|_{Y_l}
  std::vector<double> weighted;     // |<v>^k (f(t) - pi f0)|
  std::vector<double> dissipation;  // running time integral of the Y_l-type H^s_{gamma/2} norms
  std::vector<double> min_F, max_F; // over sampled x and the velocity nodes, F = mu + f
  std::vector<double> neg_part;     // |W^m0 F_-|
  std::vector<Eigen::VectorXd> moments;  // l = 0 moments of f against {1, v, |v|^2}
  std::vector<double> projection_norm;   // |pi f_0|
  std::vector<std::string> flags;
  DistributionField final_state;

  void write_csv(std::ostream& os) const;
  json summary() const;
  double moment_drift() const;
};

// Thrown on blow-up; keeps what was computed so far.
struct EvolutionAbort : NumericalAbort {
  std::shared_ptr<TrajectoryRecord> partial;
  EvolutionAbort(const std::string& what, TrajectoryRecord rec)
      : NumericalAbort(what), partial(std::make_shared<TrajectoryRecord>(std::move(rec))) {}
};

// -log slope of values(t) by least squares over [t_from, t_to].
double decay_rate(const std::vector<double>& t, const std::vector<double>& values, double t_from,
                  double t_to);
// decay_rate over [max(t_from, t_b / 2), t_b], t_b the last record above rel_floor times
// the first one, so the roundoff plateau stays out of the fit.
double tail_decay_rate(const std::vector<double>& t, const std::vector<double>& values,
                       double rel_floor = 1e-8, double t_from = -1.0);

using Observer = std::function<void(double t, const DistributionField& f)>;

TrajectoryRecord evolve_linear(const DistributionField& h0, const LinearModel& m,
                               const KernelParams& kp, const EvolutionConfig& cfg,
                               const Observer& observe = {});

// Moments of the l = 0 mode are removed first; |f0|_{Y_l} must not exceed cfg.eps0.
TrajectoryRecord evolve_nonlinear(const DistributionField& f0, const LinearModel& m,
                                  const KernelParams& kp, const AngularQuadrature& aq,
                                  const EvolutionConfig& cfg);

struct PicardResult {
  TrajectoryRecord trajectory;     // last iterate
  std::vector<double> w_norms;     // sup_t |f^(n+1) - f^n|_{Y_(l-2)}
  std::vector<double> ratios;      // w_norms[n] / w_norms[n-1]
  int iterations = 0;
  bool converged = false;
  json table() const;
};

// f^(n+1)_t + v . grad_x f^(n+1) = Q(mu + f^n, f^(n+1)) + Q(f^n, mu), f^0 = 0, each solved on
// the time grid of evolve_nonlinear so the fixed point is the direct solution.
PicardResult picard_solve(const DistributionField& f0, const LinearModel& m,
                          const KernelParams& kp, const AngularQuadrature& aq,
                          const EvolutionConfig& cfg);

// Rough data: <v>^k0 h_l has |FFT| proportional to <xi>^(s - 3/2 - eps') with random phases
// keyed by the dual lattice index, so coarse and fine grids share their common frequencies.
struct RoughParams {
  double eps_prime = 0.25;
  std::vector<Mode> modes{{0, 0, 0}, {1, 0, 0}};  // negative partners added automatically
  std::uint64_t seed = 7;
  bool smooth = false;  // Gaussian bumps instead (reference case)
};
DistributionField rough_initial(const VelocityGrid& g, int k0, double s, const RoughParams& rp);

// sum_l int |FFT(<v>^k0 h_l)(xi)|^2 / (<xi>^s + <l>^(s/(2s+1)))^2 dxi / (2 pi)^3.
double initial_functional(const DistributionField& h, int k0, double s);

struct RegularizationRun {
  int n = 0;
  double eps_prime = 0.0;
  double functional = 0.0;
  double initial_weighted = 0.0;  // |<v>^k0 h0|
  double integral = 0.0;          // int_0^T0 |<v>^k0 h(t)|^2 dt
  double ratio = 0.0;
  double tail_rate = 0.0;
  double gap = 0.0;
  double multiplier_envelope_excess = 0.0;  // > 0 when the monotone envelope is exceeded
};
RegularizationRun regularization_run(const DistributionField& h0, const LinearModel& m,
                                     const KernelParams& kp, const EvolutionConfig& cfg);

struct RegularizationSetup {
  double Lv = 5.0;
  int n_coarse = 8;
  int n_fine = 10;
  int n_theta = 8, n_phi = 8;
  RoughParams rough{};
};
// Coarse run, refined grid, rougher data; ratio stability (50%) and tail rate (20%).
EstimateReport regularization_experiment(const RegularizationSetup& setup, const KernelParams& kp,
                                         const EvolutionConfig& cfg,
                                         std::vector<RegularizationRun>* runs = nullptr);

// (|f|_{Y_l}^2 + A int_0^inf |S(tau) f|^2_{L^2(W^l0; H^2_x)} d tau)^(1/2), the integral cut
// where the integrand falls below 1e-12 of its start.
struct TripleNormParams {
  double A = 1.0;
  double l0 = 11.0;
  double tau_cap = 400.0;
};
double semigroup_triple_norm(const DistributionField& f, const LinearModel& m,
                             const EvolutionConfig& cfg, const TripleNormParams& tp);

// min F >= -1e-8 max F at every record and the negative part never grows.
EstimateReport positivity_monitor(const TrajectoryRecord& tr);

// Smooth perturbation with modes 0 and +-e1, zero moments and |f|_{Y_l} = y_size.
DistributionField small_perturbation(const VelocityGrid& g, double y_size, const YNorm& y,
                                     std::uint64_t seed);

}  // namespace kgap
