#pragma once
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <string>

#include "kgap/grids.hpp"
#include "kgap/linearized.hpp"
#include "kgap/report.hpp"

namespace kgap {

struct Sampling {
  std::uint64_t seed = 7;
  long n = 10000;
};

// Random pre-collision pair and sigma with theta in [0, pi/2].
struct CollisionSample {
  Vec3 v, vs, sigma;
  double theta = 0.0;
  Vec3 vp() const;   // v'
  Vec3 omega() const;  // unit vector of sigma minus its component along v - v*
};
CollisionSample random_collision(std::mt19937_64& rng);

// <v'>^2k = <v>^2k cos^2k + D1 + D2 + D3 with the t-integral by Gauss-Legendre, and the
// remainder of the leading-order expansion against its three-term bound.
EstimateReport verify_weight_expansion(double k, const Sampling& smp);

// |<v'>^k - <v>^k| <= (1 + nu)|v' - v|^k + C_{k,nu} |v' - v| <v>^(k-1).
double weight_diff_constant(double k, double nu);
EstimateReport verify_weight_diff_bound(double k, double nu, const Sampling& smp);

// (1 + X)^m <= (1 + nu) X^m + (1 + 1/((1 + nu)^(1/m) - 1))^m.
EstimateReport verify_convex_inequality(const std::vector<double>& m_list, double nu,
                                        const Sampling& smp);

// int_0^t |xi - s eta|^p ds (Abs) or int_0^t <xi - s eta>^p ds (Bracket).
enum class UkaiIntegrand { Abs, Bracket };
double ukai_integral(const Vec3& xi, const Vec3& eta, double t, double p, UkaiIntegrand kind);
double ukai_constant(double alpha);  // 1 / (2^(alpha+1) (alpha+1))

// Closed form at alpha = 2, the lower bound with the explicit constant, and the fitted
// two-sided / upper relations for the bracket integrals.
std::vector<EstimateReport> verify_ukai(const std::vector<double>& alpha_list,
                                        const std::vector<double>& beta_list,
                                        const Sampling& smp);

// M(t, l, xi) = (1 + delta int_0^(T-t) <xi - tau eta>^(2s) d tau)^(-1/2 - eps), eta = 2 pi l.
struct MultiplierSymbol {
  double s = 0.5;
  double delta = 0.1;
  double eps = 0.2;
  double T = 1.0;
  double t = 0.0;
  Vec3 eta{0.0, 0.0, 0.0};
  void validate() const;
  double exponent() const { return 0.5 + eps; }
};
double multiplier_integral(const MultiplierSymbol& ms, const Vec3& xi);
double multiplier_eval(const MultiplierSymbol& ms, const Vec3& xi);
// grad_xi M / M.
Vec3 multiplier_log_gradient(const MultiplierSymbol& ms, const Vec3& xi);
std::vector<EstimateReport> multiplier_checks(const MultiplierSymbol& base, const Sampling& smp);

// Constants behind the moment-propagation argument.
struct ConstantsReport {
  double gamma1 = 0.0;          // min_v int |v - v*|^gamma mu* / <v>^gamma
  double gamma1_bound = 0.0;    // 2^(-gamma-7) 28 / (3 sqrt(2 pi))
  double moment = 0.0;          // int <v>^gamma mu
  double moment_bound = 0.0;    // 26 / (3 sqrt(2 pi))
  double gamma0 = 0.0;
  double gamma3 = 0.0;
  int k0 = 0;
};
// v |-> int |v - v*|^gamma mu(v*) dv* for |v| = r.
double gamma_convolution(double gamma, double r);
ConstantsReport compute_constants(const KernelParams& kp, int k0 = 0, double r_max = 8.0);
std::vector<EstimateReport> verify_constants(const KernelParams& kp, int k0 = 0,
                                             double r_max = 8.0);

// Versioned test family: mu times products of Hermite polynomials up to total degree 4,
// then sqrt(mu) times random band-limited cosines. Every field has unit L2 norm.
struct TestFamily {
  std::string version = "family-v1";
  std::vector<Eigen::VectorXd> fields;
  std::vector<std::string> labels;
};
TestFamily build_test_family(const VelocityGrid& g, int n_random, std::uint64_t seed);

// Signed random fields with a Gaussian envelope (for the positive/negative part sandwich).
std::vector<Eigen::VectorXd> random_signed_fields(const VelocityGrid& g, int count,
                                                  std::uint64_t seed);

// 1/2 |h|^2_{H^s} <= |h+|^2_{H^s} + |h-|^2_{H^s} <= 2 |h|^2_{H^s} (Gagliardo form).
EstimateReport verify_pos_neg_sandwich(const VelocityGrid& g, double s, int count,
                                       std::uint64_t seed);

// Q_R + Q_Rbar against the full strong form on a smooth pair.
EstimateReport verify_split_partition(const VelocityGrid& g, const KernelParams& kp,
                                      const AngularQuadrature& aq, double R);

// sum |f| <v>^k h^3
double weighted_l1(const VelocityGrid& g, const Eigen::VectorXd& f, double k);

struct FieldContext {
  VelocityGrid grid;
  KernelParams kp;
  AngularQuadrature aq;
  TestFamily family;
};

// <Q(mu, f), f> <= -c |f|^2_{H^s_{gamma/2}} + C |f|^2_{L^2_{gamma/2}} on the family.
EstimateReport verify_coercivity(const FieldContext& ctx);
// |<Q(f, g), h>| <= C (|f|_{L^1_{gamma+2s}} + |f|_2) |g|_{H^s_{gamma/2+2s}} |h|_{H^s_{gamma/2}}.
EstimateReport verify_trilinear(const FieldContext& ctx, int n_triples, std::uint64_t seed);
// Two-sided J1 and C0 relations on the family.
std::vector<EstimateReport> verify_j1_family(const FieldContext& ctx);

// Dissipativity of -Lambda and -B, reconstruction of both splits, boundedness of A.
std::vector<EstimateReport> verify_decompositions(const VelocityGrid& g, const KernelParams& kp,
                                                  const AngularQuadrature& aq,
                                                  const DecompositionParams& dp, int count,
                                                  std::uint64_t seed);

}  // namespace kgap
