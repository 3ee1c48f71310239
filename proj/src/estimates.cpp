#include "kgap/estimates.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>

namespace kgap {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double bracket(double r2) { return std::sqrt(1.0 + r2); }

double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Vec3 random_unit(std::mt19937_64& rng) {
  const double z = uniform(rng, -1.0, 1.0), ph = uniform(rng, 0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(ph), r * std::sin(ph), z};
}

// Magnitudes spread over several decades.
Vec3 random_vector(std::mt19937_64& rng, double lo, double hi) {
  const double m = std::pow(10.0, uniform(rng, lo, hi));
  const Vec3 e = random_unit(rng);
  return {m * e[0], m * e[1], m * e[2]};
}

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 axpy(double s, const Vec3& a, const Vec3& b) {
  return {b[0] + s * a[0], b[1] + s * a[1], b[2] + s * a[2]};
}

EstimateReport base(const std::string& name, Tier tier, const Sampling& smp,
                    const std::string& family) {
  EstimateReport r;
  r.name = name;
  r.tier = tier;
  r.seed = smp.seed;
  r.n_samples = smp.n;
  r.family = family;
  return r;
}

// Fixed Gauss-Legendre rule on [0,1], shared by the per-sample integrals.
const std::vector<double>& gl_nodes(int q, bool weights) {
  static std::vector<double> x64, w64, x16, w16;
  static const bool init = [] {
    gauss_legendre(64, 0.0, 1.0, x64, w64);
    gauss_legendre(16, 0.0, 1.0, x16, w16);
    return true;
  }();
  (void)init;
  if (q == 64) return weights ? w64 : x64;
  return weights ? w16 : x16;
}

// Composite 16-point rule on [0, len] with panels no wider than `width`.
template <class F>
double composite(F&& f, double len, double width) {
  const int panels = std::max(1, static_cast<int>(std::ceil(len / width)));
  const auto& x = gl_nodes(16, false);
  const auto& w = gl_nodes(16, true);
  const double hp = len / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p)
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(hp * (p + x[i]));
  return acc * hp;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

Vec3 CollisionSample::vp() const {
  const Vec3 u = sub(v, vs);
  const double r = std::sqrt(norm2(u));
  return {0.5 * (v[0] + vs[0] + r * sigma[0]), 0.5 * (v[1] + vs[1] + r * sigma[1]),
          0.5 * (v[2] + vs[2] + r * sigma[2])};
}

Vec3 CollisionSample::omega() const {
  const Vec3 u = sub(v, vs);
  const double r = std::sqrt(norm2(u));
  if (r == 0.0) return {0.0, 0.0, 0.0};
  const Vec3 k{u[0] / r, u[1] / r, u[2] / r};
  const Vec3 w = axpy(-dot(sigma, k), k, sigma);
  const double n = std::sqrt(norm2(w));
  if (n == 0.0) return {0.0, 0.0, 0.0};
  return {w[0] / n, w[1] / n, w[2] / n};
}

CollisionSample random_collision(std::mt19937_64& rng) {
  CollisionSample c;
  c.v = random_vector(rng, -1.0, 1.3);
  c.vs = random_vector(rng, -1.0, 1.3);
  // Half the samples concentrate near grazing angles.
  const bool grazing = uniform(rng, 0.0, 1.0) < 0.5;
  c.theta = grazing ? 0.5 * kPi * std::pow(10.0, uniform(rng, -4.0, 0.0))
                    : std::acos(uniform(rng, 0.0, 1.0));
  const double ph = uniform(rng, 0.0, 2.0 * kPi);
  const Vec3 u = sub(c.v, c.vs);
  const double r = std::sqrt(norm2(u));
  const Frame fr = make_frame(Vec3{u[0] / r, u[1] / r, u[2] / r});
  const double ct = std::cos(c.theta), st = std::sin(c.theta);
  for (int d = 0; d < 3; ++d)
    c.sigma[d] = ct * fr.u[d] + st * (std::cos(ph) * fr.e1[d] + std::sin(ph) * fr.e2[d]);
  return c;
}

EstimateReport verify_weight_expansion(double k, const Sampling& smp) {
  if (!(k > 3.0)) throw InvalidArgument("verify_weight_expansion: k must exceed 3");
  std::mt19937_64 rng(smp.seed);
  double recon = 0.0, cfit = 0.0, literal_upper = 0.0, literal_abs = 0.0;
  for (long i = 0; i < smp.n; ++i) {
    const CollisionSample c = random_collision(rng);
    const double cs = std::cos(0.5 * c.theta), sn = std::sin(0.5 * c.theta);
    const double bv2 = 1.0 + norm2(c.v), bs2 = 1.0 + norm2(c.vs);
    const double ur = std::sqrt(norm2(sub(c.v, c.vs)));
    const double vw = dot(c.v, c.omega());
    const double a = bv2 * cs * cs;
    const double B = bs2 * sn * sn + 2.0 * cs * sn * ur * vw;
    const double lhs = std::pow(1.0 + norm2(c.vp()), k);
    const double D1 = k * std::pow(a, k - 1.0) * bs2 * sn * sn;
    const double D2 = 2.0 * k * std::pow(a, k - 1.0) * cs * sn * ur * vw;
    // The integrand is a polynomial of degree k - 1 for integer k.
    const auto& tx = gl_nodes(64, false);
    const auto& tw = gl_nodes(64, true);
    double I = 0.0;
    for (std::size_t q = 0; q < tx.size(); ++q)
      I += tw[q] * (1.0 - tx[q]) * std::pow(a + tx[q] * B, k - 2.0);
    const double D3 = k * (k - 1.0) * I * B * B;
    const double ak = std::pow(a, k);
    recon = std::max(recon, std::abs(lhs - (ak + D1 + D2 + D3)) / std::max(lhs, ak));

    const double bv = std::sqrt(bv2), bs = std::sqrt(bs2);
    const double bound = bv * std::pow(bs, 2 * k - 1) * std::pow(sn, 2 * k - 3) +
                         std::pow(bv, 2 * k - 2) * bs2 * sn * sn +
                         std::pow(bv, 2 * k - 4) * bs2 * bs2 * sn * sn;
    if (bound > 0.0) {
      const double lead = D2 + std::pow(bs * sn, 2 * k);
      const double R = lhs - ak - lead;
      cfit = std::max(cfit, std::abs(R) / bound);
      const double Rl = lhs - std::pow(bv2, k) - lead;
      literal_upper = std::max(literal_upper, Rl / bound);
      literal_abs = std::max(literal_abs, std::abs(Rl) / bound);
    }
  }
  EstimateReport r = base("weight_expansion_k" + num(k), Tier::Exact, smp, "random collisions");
  r.stats["max_rel_reconstruction"] = recon;
  r.stats["remainder_ratio_max"] = cfit;
  r.stats["uncentred_remainder_upper_ratio"] = literal_upper;
  r.stats["uncentred_remainder_abs_ratio"] = literal_abs;
  r.fitted = cfit;
  r.tolerances["reconstruction_rel"] = 1e-12;
  r.context["k"] = num(k);
  r.pass = recon <= 1e-12 && std::isfinite(cfit);
  return r;
}

double weight_diff_constant(double k, double nu) {
  const double m = k - 1.0;
  return k * std::pow(1.0 + 1.0 / (std::pow(1.0 + nu, 1.0 / m) - 1.0), m) *
         std::pow(std::sqrt(2.0), m);
}

EstimateReport verify_weight_diff_bound(double k, double nu, const Sampling& smp) {
  if (!(k > 3.0)) throw InvalidArgument("verify_weight_diff_bound: k must exceed 3");
  if (!(nu > 0.0 && nu <= 1.0)) throw InvalidArgument("verify_weight_diff_bound: nu in (0,1]");
  const double C = weight_diff_constant(k, nu);
  std::mt19937_64 rng(smp.seed);
  double worst = 0.0;
  long violations = 0, display_violations = 0;
  for (long i = 0; i < smp.n; ++i) {
    const CollisionSample c = random_collision(rng);
    const Vec3 vp = c.vp();
    const double d = std::sqrt(norm2(sub(vp, c.v)));
    const double bv = bracket(norm2(c.v)), bs = bracket(norm2(c.vs));
    const double lhs = std::abs(std::pow(bracket(norm2(vp)), k) - std::pow(bv, k));
    const double rhs = (1.0 + nu) * std::pow(d, k) + C * d * std::pow(bv, k - 1.0);
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-12)) ++violations;
    // Second displayed form, in terms of sin(theta/2) and <v*>.
    const double sn = std::sin(0.5 * c.theta);
    const double rhs2 = (1.0 + nu) * std::pow(sn * bs, k) + C * sn * std::pow(bv, k) * bs;
    if (lhs > rhs2 * (1.0 + 1e-12)) ++display_violations;
  }
  EstimateReport r = base("weight_difference_k" + num(k), Tier::Explicit, smp,
                          "random collisions");
  r.bound = C;
  r.stats["max_lhs_over_rhs"] = worst;
  r.stats["violations"] = double(violations);
  r.stats["sin_form_violations"] = double(display_violations);
  r.context["k"] = num(k);
  r.context["nu"] = num(nu);
  r.pass = violations == 0;
  return r;
}

EstimateReport verify_convex_inequality(const std::vector<double>& m_list, double nu,
                                        const Sampling& smp) {
  std::mt19937_64 rng(smp.seed);
  double worst = 0.0;
  long violations = 0;
  for (double m : m_list) {
    const double C = std::pow(1.0 + 1.0 / (std::pow(1.0 + nu, 1.0 / m) - 1.0), m);
    for (long i = 0; i < smp.n; ++i) {
      const double X = std::pow(10.0, uniform(rng, -3.0, 3.0));
      const double lhs = std::pow(1.0 + X, m), rhs = (1.0 + nu) * std::pow(X, m) + C;
      worst = std::max(worst, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-13)) ++violations;
    }
  }
  EstimateReport r = base("convex_inequality", Tier::Explicit, smp, "X log-uniform in [1e-3,1e3]");
  r.n_samples = smp.n * static_cast<long>(m_list.size());
  r.stats["max_lhs_over_rhs"] = worst;
  r.stats["violations"] = double(violations);
  std::string ms;
  for (double m : m_list) ms += (ms.empty() ? "" : ",") + num(m);
  r.context["m"] = ms;
  r.context["nu"] = num(nu);
  r.pass = violations == 0;
  return r;
}

double ukai_integral(const Vec3& xi, const Vec3& eta, double t, double p, UkaiIntegrand kind) {
  auto f = [&](double s) {
    const double r2 = norm2(axpy(-s, eta, xi));
    return kind == UkaiIntegrand::Abs ? std::pow(r2, 0.5 * p) : std::pow(1.0 + r2, 0.5 * p);
  };
  // Split at the closest approach, where |xi - s eta| may have a cusp.
  const double e2 = norm2(eta);
  const double s0 = e2 > 0.0 ? std::clamp(dot(xi, eta) / e2, 0.0, t) : 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  double acc = 0.0;
  if (s0 > 0.0) acc += ts.integrate(f, 0.0, s0, 1e-14);
  if (s0 < t) acc += ts.integrate(f, s0, t, 1e-14);
  return acc;
}

double ukai_constant(double alpha) { return 1.0 / (std::pow(2.0, alpha + 1.0) * (alpha + 1.0)); }

std::vector<EstimateReport> verify_ukai(const std::vector<double>& alpha_list,
                                        const std::vector<double>& beta_list,
                                        const Sampling& smp) {
  std::mt19937_64 rng(smp.seed);
  struct S {
    Vec3 xi, eta;
    double t;
  };
  std::vector<S> samples(static_cast<std::size_t>(smp.n));
  for (auto& s : samples) {
    s.xi = random_vector(rng, -3.0, 3.0);
    s.eta = random_vector(rng, -3.0, 3.0);
    s.t = std::pow(10.0, uniform(rng, -2.0, 1.0));
  }
  std::vector<EstimateReport> out;

  {  // alpha = 2 closed form.
    double err = 0.0;
    for (const auto& s : samples) {
      const double q = ukai_integral(s.xi, s.eta, s.t, 2.0, UkaiIntegrand::Abs);
      const double c = s.t * norm2(s.xi) - s.t * s.t * dot(s.xi, s.eta) +
                       s.t * s.t * s.t * norm2(s.eta) / 3.0;
      err = std::max(err, std::abs(q - c) / std::abs(c));
    }
    EstimateReport r = base("ukai_alpha2_closed_form", Tier::Exact, smp, "random (xi, eta, t)");
    r.stats["max_rel_error"] = err;
    r.tolerances["rel"] = 1e-10;
    r.pass = err <= 1e-10;
    out.push_back(r);
  }
  {  // Lower bound with the explicit constant.
    EstimateReport r = base("ukai_lower_bound", Tier::Explicit, smp, "random (xi, eta, t)");
    long violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    std::string al;
    for (double a : alpha_list) {
      const double ca = ukai_constant(a);
      double mn = std::numeric_limits<double>::infinity();
      for (const auto& s : samples) {
        const double q = ukai_integral(s.xi, s.eta, s.t, a, UkaiIntegrand::Abs);
        const double rhs = s.t * std::pow(norm2(s.xi), 0.5 * a) +
                           std::pow(s.t, a + 1.0) * std::pow(norm2(s.eta), 0.5 * a);
        mn = std::min(mn, q / rhs);
        if (q < ca * rhs * (1.0 - 1e-12)) ++violations;
      }
      r.stats["min_ratio_alpha_" + num(a)] = mn;
      r.stats["constant_alpha_" + num(a)] = ca;
      worst = std::min(worst, mn / ca);
      al += (al.empty() ? "" : ",") + num(a);
    }
    r.n_samples = smp.n * static_cast<long>(alpha_list.size());
    r.stats["violations"] = double(violations);
    r.stats["min_ratio_over_constant"] = worst;
    r.context["alpha"] = al;
    r.pass = violations == 0;
    out.push_back(r);
  }
  {  // Two-sided bracket equivalence.
    EstimateReport r = base("ukai_bracket_equivalence", Tier::Fitted, smp, "random (xi, eta, t)");
    bool ok = true;
    for (double a : alpha_list) {
      RatioStats st;
      for (const auto& s : samples) {
        const double q = ukai_integral(s.xi, s.eta, s.t, a, UkaiIntegrand::Bracket);
        const double rhs =
            s.t * std::pow(1.0 + norm2(s.xi) + s.t * s.t * norm2(s.eta), 0.5 * a);
        st.add(q / rhs);
      }
      r.stats["min_ratio_alpha_" + num(a)] = st.min;
      r.stats["max_ratio_alpha_" + num(a)] = st.max;
      ok = ok && st.finite() && st.min > 0.0;
    }
    r.n_samples = smp.n * static_cast<long>(alpha_list.size());
    r.pass = ok;
    out.push_back(r);
  }
  {  // Negative powers: upper bound.
    EstimateReport r = base("ukai_negative_power", Tier::Fitted, smp, "random (xi, eta, t)");
    bool ok = true;
    double cmax = 0.0;
    for (double b : beta_list) {
      if (!(b > 0.0 && b < 1.0)) throw InvalidArgument("verify_ukai: beta must lie in (0,1)");
      RatioStats st;
      for (const auto& s : samples) {
        const double q = ukai_integral(s.xi, s.eta, s.t, -b, UkaiIntegrand::Bracket);
        const double rhs =
            s.t * std::pow(1.0 + norm2(s.xi) + s.t * s.t * norm2(s.eta), -0.5 * b);
        st.add(q / rhs);
      }
      r.stats["max_ratio_beta_" + num(b)] = st.max;
      cmax = std::max(cmax, st.max);
      ok = ok && st.finite();
    }
    r.n_samples = smp.n * static_cast<long>(beta_list.size());
    r.fitted = cmax;
    r.pass = ok;
    out.push_back(r);
  }
  return out;
}

void MultiplierSymbol::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("multiplier: s must lie in (0,1)");
  if (!(delta > 0.0)) throw InvalidArgument("multiplier: delta must be positive");
  if (!(eps > 0.0 && eps < (1.0 - s) / (2.0 * s)))
    throw InvalidArgument("multiplier: eps must lie in (0, (1-s)/(2s))");
  if (!(T > 0.0) || t < 0.0 || t > T) throw InvalidArgument("multiplier: need 0 <= t <= T");
}

namespace {
// <xi - tau eta> is analytic within distance 1 of the real segment in xi-units; panels of
// half that width keep the 16-point rule at roundoff.
double panel_width(const MultiplierSymbol& ms) {
  const double e = std::sqrt(norm2(ms.eta));
  return e > 0.0 ? 0.5 / e : ms.T;
}
}  // namespace

double multiplier_integral(const MultiplierSymbol& ms, const Vec3& xi) {
  const double len = ms.T - ms.t;
  if (len <= 0.0) return 0.0;
  return composite(
      [&](double tau) { return std::pow(1.0 + norm2(axpy(-tau, ms.eta, xi)), ms.s); }, len,
      panel_width(ms));
}

double multiplier_eval(const MultiplierSymbol& ms, const Vec3& xi) {
  return std::pow(1.0 + ms.delta * multiplier_integral(ms, xi), -ms.exponent());
}

Vec3 multiplier_log_gradient(const MultiplierSymbol& ms, const Vec3& xi) {
  const double len = ms.T - ms.t;
  Vec3 g{0.0, 0.0, 0.0};
  if (len <= 0.0) return g;
  for (int d = 0; d < 3; ++d)
    g[d] = composite(
        [&](double tau) {
          const Vec3 z = axpy(-tau, ms.eta, xi);
          return 2.0 * ms.s * std::pow(1.0 + norm2(z), ms.s - 1.0) * z[d];
        },
        len, panel_width(ms));
  const double f = -ms.exponent() * ms.delta / (1.0 + ms.delta * multiplier_integral(ms, xi));
  return {f * g[0], f * g[1], f * g[2]};
}

std::vector<EstimateReport> multiplier_checks(const MultiplierSymbol& base_ms,
                                              const Sampling& smp) {
  base_ms.validate();
  std::mt19937_64 rng(smp.seed);
  std::vector<EstimateReport> out;
  const std::string fam = "random (t, xi, l)";
  double mmin = 1.0, mmax = 0.0, end_dev = 0.0, commute = 0.0, grad = 0.0, closed = 0.0;
  for (long i = 0; i < smp.n; ++i) {
    MultiplierSymbol ms = base_ms;
    ms.t = uniform(rng, 0.05, 0.95) * ms.T;
    Mode l{0, 0, 0};
    for (int& c : l) c = static_cast<int>(std::floor(uniform(rng, -3.0, 4.0)));
    for (int d = 0; d < 3; ++d) ms.eta[d] = 2.0 * kPi * l[d];
    const Vec3 xi = random_vector(rng, -1.0, 2.0);

    const double M = multiplier_eval(ms, xi);
    mmin = std::min(mmin, M);
    mmax = std::max(mmax, M);
    MultiplierSymbol at_end = ms;
    at_end.t = ms.T;
    end_dev = std::max(end_dev, std::abs(multiplier_eval(at_end, xi) - 1.0));

    // (d/dt - eta . grad) M as one directional difference along (t, xi) -> (t + e, xi - e eta).
    const double e = 1e-4 * ms.T;
    MultiplierSymbol p = ms, m = ms;
    p.t += e;
    m.t -= e;
    const double fd = (multiplier_eval(p, axpy(-e, ms.eta, xi)) -
                       multiplier_eval(m, axpy(e, ms.eta, xi))) /
                      (2.0 * e);
    const double bxi = std::pow(1.0 + norm2(xi), ms.s);
    const double exact = ms.exponent() * M * ms.delta * bxi /
                         (1.0 + ms.delta * multiplier_integral(ms, xi));
    commute = std::max(commute, std::abs(fd - exact) / std::abs(exact));

    const Vec3 lg = multiplier_log_gradient(ms, xi);
    const double scale = std::sqrt(1.0 + norm2(xi)) + (ms.T - ms.t) * std::sqrt(norm2(ms.eta));
    grad = std::max(grad, std::sqrt(norm2(lg)) * scale);

    // Zero mode: closed form.
    MultiplierSymbol z = ms;
    z.eta = {0.0, 0.0, 0.0};
    const double cf = std::pow(1.0 + z.delta * (z.T - z.t) * bxi, -z.exponent());
    closed = std::max(closed, std::abs(multiplier_eval(z, xi) - cf) / cf);
  }
  {
    EstimateReport r = base("multiplier_range", Tier::Exact, smp, fam);
    r.stats["min"] = mmin;
    r.stats["max"] = mmax;
    r.stats["max_deviation_at_T"] = end_dev;
    r.pass = mmin > 0.0 && mmax <= 1.0 && end_dev == 0.0;
    out.push_back(r);
  }
  {
    EstimateReport r = base("multiplier_commute", Tier::Exact, smp, fam);
    r.stats["max_rel_error"] = commute;
    r.tolerances["rel"] = 1e-5;
    r.pass = commute <= 1e-5;
    out.push_back(r);
  }
  {
    EstimateReport r = base("multiplier_zero_mode_closed_form", Tier::Exact, smp, fam);
    r.stats["max_rel_error"] = closed;
    r.tolerances["rel"] = 1e-10;
    r.pass = closed <= 1e-10;
    out.push_back(r);
  }
  {
    EstimateReport r = base("multiplier_log_gradient", Tier::Fitted, smp, fam);
    r.stats["max_scaled_log_gradient"] = grad;
    r.fitted = grad;
    r.pass = std::isfinite(grad);
    out.push_back(r);
  }
  for (auto& r : out) {
    r.context["s"] = num(base_ms.s);
    r.context["delta"] = num(base_ms.delta);
    r.context["eps"] = num(base_ms.eps);
    r.context["T"] = num(base_ms.T);
  }
  return out;
}

double gamma_convolution(double gamma, double r) {
  // |v - v*| for v* ~ mu is a noncentral chi variable with three degrees of freedom.
  if (r < 1e-6)
    return std::pow(2.0, 0.5 * gamma) * std::tgamma(0.5 * (3.0 + gamma)) / std::tgamma(1.5);
  const double hi = r + 14.0;
  return GK::integrate(
      [&](double rho) {
        const double d = std::exp(-0.5 * (rho - r) * (rho - r)) -
                         std::exp(-0.5 * (rho + r) * (rho + r));
        return std::pow(rho, gamma + 1.0) * d / (r * std::sqrt(2.0 * kPi));
      },
      0.0, hi, 20, 1e-14);
}

ConstantsReport compute_constants(const KernelParams& kp, int k0, double r_max) {
  kp.validate();
  ConstantsReport c;
  const double g = kp.gamma;
  auto ratio = [&](double r) { return gamma_convolution(g, r) / std::pow(1.0 + r * r, 0.5 * g); };
  // Scan, then refine the bracket around the smallest sample by golden section.
  const int m = 400;
  int best = 0;
  double bv = ratio(0.0);
  for (int i = 1; i <= m; ++i) {
    const double v = ratio(r_max * i / m);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  double a = r_max * std::max(0, best - 1) / m, b = r_max * std::min(m, best + 1) / m;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    if (ratio(x1) < ratio(x2))
      b = x2;
    else
      a = x1;
  }
  c.gamma1 = std::min(bv, ratio(0.5 * (a + b)));
  c.gamma1_bound = std::pow(2.0, -g - 7.0) * 28.0 / (3.0 * std::sqrt(2.0 * kPi));
  c.moment = std::sqrt(2.0 / kPi) *
             GK::integrate(
                 [&](double r) {
                   return r * r * std::pow(1.0 + r * r, 0.5 * g) * std::exp(-0.5 * r * r);
                 },
                 0.0, 40.0, 20, 1e-14);
  c.moment_bound = 26.0 / (3.0 * std::sqrt(2.0 * kPi));
  c.k0 = k0 > 0 ? k0 : static_cast<int>(std::ceil(0.5 * (5.0 * g + 37.0))) + 1;
  // Sphere integrals of b against smooth functions of theta.
  const AngularQuadrature aq = build_angular(kp, 96, 8);
  const double tp = aq.w_phi * double(aq.n_phi());
  double cosint = 0.0, sin2 = 0.0;
  const double p = 2.0 * c.k0 - 3.0 - g;
  for (std::size_t i = 0; i < aq.n_theta(); ++i) {
    const double h = 0.5 * aq.theta[i];
    cosint += aq.w_theta[i] * (std::pow(std::cos(h), p) - 1.0);
    sin2 += aq.w_theta[i] * std::sin(h) * std::sin(h);
  }
  c.gamma0 = -0.5 * c.gamma1 * tp * cosint;
  c.gamma3 = std::pow(2.0, -(2.0 * c.k0 - g - 5.0) / 4.0) * c.moment * tp * sin2;
  return c;
}

std::vector<EstimateReport> verify_constants(const KernelParams& kp, int k0, double r_max) {
  const ConstantsReport c = compute_constants(kp, k0, r_max);
  const Sampling smp{0, 1};
  std::vector<EstimateReport> out;
  const std::string g = num(kp.gamma);
  {
    EstimateReport r = base("gamma1_lower_bound_gamma" + g, Tier::Explicit, smp, "radial quadrature");
    r.stats["gamma1"] = c.gamma1;
    r.bound = c.gamma1_bound;
    r.context["r_max"] = num(r_max);
    r.pass = c.gamma1 > c.gamma1_bound;
    out.push_back(r);
  }
  {
    EstimateReport r = base("moment_upper_bound_gamma" + g, Tier::Explicit, smp, "radial quadrature");
    r.stats["moment"] = c.moment;
    r.stats["intermediate_bound"] = 1.0 + 6.0 / std::sqrt(2.0 * kPi);
    r.bound = c.moment_bound;
    r.pass = c.moment < 1.0 + 6.0 / std::sqrt(2.0 * kPi) && c.moment < c.moment_bound;
    out.push_back(r);
  }
  {
    EstimateReport r = base("gamma0_vs_gamma3_gamma" + g, Tier::Diagnostic, smp, "angular quadrature");
    r.stats["gamma0"] = c.gamma0;
    r.stats["gamma3"] = c.gamma3;
    r.stats["k0"] = c.k0;
    r.context["theta_min_rad"] = num(kp.theta_min);
    r.pass = 0.5 * c.gamma0 > c.gamma3;
    out.push_back(r);
  }
  return out;
}

}  // namespace kgap
