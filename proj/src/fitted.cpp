#include <algorithm>
#include <cmath>
#include <limits>

#include "kgap/collision.hpp"
#include "kgap/estimates.hpp"
#include "kgap/norms.hpp"

namespace kgap {

namespace {

double hermite(int n, double x) {
  switch (n) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return x * x - 1.0;
    case 3: return x * x * x - 3.0 * x;
    default: return x * x * x * x - 6.0 * x * x + 3.0;
  }
}

double unit_l2(const VelocityGrid& g, Eigen::VectorXd& f) {
  const double n = std::sqrt(f.squaredNorm() * g.cell());
  if (n > 0.0) f /= n;
  return n;
}

// sqrt(mu) (or an envelope) times a few random cosines with |xi| <= xi_max.
Eigen::VectorXd band_limited(const VelocityGrid& g, std::mt19937_64& rng,
                             const Eigen::VectorXd& envelope, double xi_max) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  for (int m = 0; m < 8; ++m) {
    Vec3 xi;
    do {
      xi = {U(rng) * xi_max, U(rng) * xi_max, U(rng) * xi_max};
    } while (norm2(xi) > xi_max * xi_max);
    const double c = N(rng), ph = kPi * U(rng);
    for (std::size_t p = 0; p < g.size(); ++p)
      f[p] += c * std::cos(dot(xi, g.node(p)) + ph);
  }
  f = f.cwiseProduct(envelope);
  unit_l2(g, f);
  return f;
}

Eigen::VectorXd bracket_power(const VelocityGrid& g, double k) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.size()));
  for (std::size_t p = 0; p < g.size(); ++p) w[p] = std::pow(japan(norm2(g.node(p))), k);
  return w;
}

double sob2(const VelocityGrid& g, const Eigen::VectorXd& f, double beta, double k) {
  const double n = weighted_sobolev(g, f.cast<cd>(), NormSpec{beta, k});
  return n * n;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

EstimateReport field_report(const std::string& name, Tier tier, const FieldContext& ctx,
                            long n) {
  EstimateReport r;
  r.name = name;
  r.tier = tier;
  r.n_samples = n;
  r.family = ctx.family.version;
  r.context["Lv"] = num(ctx.grid.Lv());
  r.context["n"] = std::to_string(ctx.grid.n());
  r.context["gamma"] = num(ctx.kp.gamma);
  r.context["s"] = num(ctx.kp.s);
  return r;
}

}  // namespace

TestFamily build_test_family(const VelocityGrid& g, int n_random, std::uint64_t seed) {
  TestFamily fam;
  const Eigen::VectorXd mu = maxwellian_values(g);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      for (int c = 0; a + b + c <= 4; ++c) {
        Eigen::VectorXd f(static_cast<Eigen::Index>(g.size()));
        for (std::size_t p = 0; p < g.size(); ++p) {
          const Vec3 v = g.node(p);
          f[p] = mu[p] * hermite(a, v[0]) * hermite(b, v[1]) * hermite(c, v[2]);
        }
        unit_l2(g, f);
        fam.fields.push_back(f);
        fam.labels.push_back("hermite_" + std::to_string(a) + std::to_string(b) +
                             std::to_string(c));
      }
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd env = mu.cwiseSqrt();
  for (int i = 0; i < n_random; ++i) {
    fam.fields.push_back(band_limited(g, rng, env, 3.0));
    fam.labels.push_back("band_" + std::to_string(i));
  }
  return fam;
}

std::vector<Eigen::VectorXd> random_signed_fields(const VelocityGrid& g, int count,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd env(static_cast<Eigen::Index>(g.size()));
  for (std::size_t p = 0; p < g.size(); ++p) env[p] = std::exp(-0.25 * norm2(g.node(p)));
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(band_limited(g, rng, env, 4.0));
  return out;
}

EstimateReport verify_pos_neg_sandwich(const VelocityGrid& g, double s, int count,
                                       std::uint64_t seed) {
  const auto fields = random_signed_fields(g, count, seed);
  long violations = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& h : fields) {
    const auto [hp, hm] = pos_neg_parts(h);
    const double a = hs_norm2_gagliardo(g, h, s);
    const double b = hs_norm2_gagliardo(g, hp, s) + hs_norm2_gagliardo(g, hm, s);
    lo = std::min(lo, b / a);
    hi = std::max(hi, b / a);
    if (b < 0.5 * a * (1.0 - 1e-12) || b > 2.0 * a * (1.0 + 1e-12)) ++violations;
  }
  EstimateReport r;
  r.name = "pos_neg_sandwich";
  r.tier = Tier::Explicit;
  r.seed = seed;
  r.n_samples = count;
  r.family = "signed band-limited fields";
  r.stats["min_ratio"] = lo;
  r.stats["max_ratio"] = hi;
  r.stats["violations"] = double(violations);
  r.context["s"] = num(s);
  r.context["n"] = std::to_string(g.n());
  r.pass = violations == 0;
  return r;
}

EstimateReport verify_split_partition(const VelocityGrid& g, const KernelParams& kp,
                                      const AngularQuadrature& aq, double R) {
  const Eigen::VectorXd mu = maxwellian_values(g);
  Eigen::VectorXd f(mu.size()), h(mu.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 v = g.node(p);
    f[p] = mu[p] * (1.0 + 0.3 * v[0] - 0.2 * v[1] * v[2]);
    h[p] = std::exp(-0.6 * norm2(Vec3{v[0] - 0.4, v[1], v[2] + 0.3}));
  }
  const auto F = DistributionField::homogeneous(g, f);
  const auto H = DistributionField::homogeneous(g, h);
  SplitParams sp;
  sp.R = R;
  const auto [qr, qb] = q_split(F, H, kp, sp, aq);
  const auto full = q_direct(F, H, kp, aq);
  const Eigen::VectorXcd sum = qr.get({0, 0, 0}) + qb.get({0, 0, 0});
  const Eigen::VectorXcd ref = full.get({0, 0, 0});
  const double err = (sum - ref).norm() / ref.norm();
  EstimateReport r;
  r.name = "split_partition";
  r.tier = Tier::Exact;
  r.n_samples = 1;
  r.family = "smooth pair";
  r.stats["rel_error"] = err;
  r.tolerances["rel"] = 1e-12;
  r.context["R"] = num(R);
  r.pass = err <= 1e-12;
  return r;
}

double weighted_l1(const VelocityGrid& g, const Eigen::VectorXd& f, double k) {
  return f.cwiseAbs().dot(bracket_power(g, k)) * g.cell();
}

EstimateReport verify_coercivity(const FieldContext& ctx) {
  const auto& g = ctx.grid;
  const Eigen::VectorXd mu = maxwellian_values(g);
  const double gh = 0.5 * ctx.kp.gamma, s = ctx.kp.s;
  const std::size_t m = ctx.family.fields.size();
  std::vector<double> q(m), x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& f = ctx.family.fields[i];
    q[i] = q_direct_real(g, mu, f, ctx.kp, ctx.aq).dot(f) * g.cell();
    x[i] = sob2(g, f, s, gh);
    y[i] = sob2(g, f, 0.0, gh);
  }
  // Smallest C that works with c = 0, floored by a tenth of the median |q|/y, then doubled;
  // c is the largest value compatible with that C.
  double cmin = 0.0;
  std::vector<double> qy(m);
  for (std::size_t i = 0; i < m; ++i) {
    cmin = std::max(cmin, q[i] / y[i]);
    qy[i] = std::abs(q[i]) / y[i];
  }
  std::nth_element(qy.begin(), qy.begin() + static_cast<long>(m / 2), qy.end());
  const double C = 2.0 * std::max(cmin, 0.1 * qy[m / 2]);
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) c = std::min(c, (C * y[i] - q[i]) / x[i]);
  EstimateReport r = field_report("coercivity", Tier::Fitted, ctx, static_cast<long>(m));
  r.stats["c"] = c;
  r.stats["C"] = C;
  r.stats["C_min"] = cmin;
  r.fitted = c;
  r.pass = c > 0.0 && std::isfinite(C);
  return r;
}

EstimateReport verify_trilinear(const FieldContext& ctx, int n_triples, std::uint64_t seed) {
  const auto& g = ctx.grid;
  const auto& F = ctx.family.fields;
  const double gm = ctx.kp.gamma, s = ctx.kp.s;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, F.size() - 1);
  RatioStats st;
  for (int t = 0; t < n_triples; ++t) {
    const auto& f = F[pick(rng)];
    const auto& gg = F[pick(rng)];
    const auto& h = F[pick(rng)];
    const double lhs = std::abs(q_direct_real(g, f, gg, ctx.kp, ctx.aq).dot(h) * g.cell());
    const double nf = weighted_l1(g, f, gm + 2.0 * s) + std::sqrt(f.squaredNorm() * g.cell());
    const double rhs = nf * std::sqrt(sob2(g, gg, s, 0.5 * gm + 2.0 * s)) *
                       std::sqrt(sob2(g, h, s, 0.5 * gm));
    st.add(lhs / rhs);
  }
  EstimateReport r = field_report("trilinear", Tier::Fitted, ctx, n_triples);
  r.seed = seed;
  r.stats["max_ratio"] = st.max;
  r.stats["min_ratio"] = st.min;
  r.fitted = st.max;
  r.context["m"] = "0";
  r.context["sigma"] = "0";
  r.pass = st.finite();
  return r;
}

std::vector<EstimateReport> verify_j1_family(const FieldContext& ctx) {
  const auto& g = ctx.grid;
  const Eigen::VectorXd mu = maxwellian_values(g);
  const double gh = 0.5 * ctx.kp.gamma, s = ctx.kp.s;
  const Eigen::VectorXd wg = bracket_power(g, gh);
  RatioStats eq, c0hi, c0lo, qj;
  for (const auto& f : ctx.family.fields) {
    const Eigen::VectorXcd fc = f.cast<cd>();
    const double l2g = sob2(g, f, 0.0, gh);
    const double jg = j1_functional(g, fc, ctx.kp, ctx.aq, KineticFactor::Full,
                                    InterpRule::Modulated);
    const double j0 = j1_functional(g, f.cwiseProduct(wg).cast<cd>(), ctx.kp, ctx.aq,
                                    KineticFactor::Maxwell, InterpRule::Modulated);
    eq.add((jg + l2g) / (j0 + l2g));
    const double c0 = c0_functional(g, mu, fc, ctx.aq, InterpRule::Modulated);
    const double hs = sob2(g, f, s, 0.0), l2 = sob2(g, f, 0.0, 0.0);
    c0hi.add(c0 / hs);
    c0lo.add((c0 + l2) / hs);
    const double q = q_direct_real(g, mu, f, ctx.kp, ctx.aq).dot(f) * g.cell();
    qj.add(-q / (jg + l2g));
  }
  const long m = static_cast<long>(ctx.family.fields.size());
  std::vector<EstimateReport> out;
  {
    EstimateReport r = field_report("j1_weight_equivalence", Tier::Fitted, ctx, m);
    r.stats["min_ratio"] = eq.min;
    r.stats["max_ratio"] = eq.max;
    r.pass = eq.finite() && eq.min > 0.0;
    out.push_back(r);
  }
  {
    EstimateReport r = field_report("c0_sobolev_equivalence", Tier::Fitted, ctx, m);
    r.stats["max_c0_over_hs"] = c0hi.max;
    r.stats["min_c0_plus_l2_over_hs"] = c0lo.min;
    r.pass = c0hi.finite() && c0lo.finite() && c0lo.min > 0.0;
    out.push_back(r);
  }
  {
    EstimateReport r = field_report("dissipation_by_j1", Tier::Fitted, ctx, m);
    r.stats["max_ratio"] = qj.max;
    r.fitted = qj.max;
    r.pass = qj.finite();
    out.push_back(r);
  }
  return out;
}

std::vector<EstimateReport> verify_decompositions(const VelocityGrid& g, const KernelParams& kp,
                                                  const AngularQuadrature& aq,
                                                  const DecompositionParams& dp, int count,
                                                  std::uint64_t seed) {
  std::vector<EstimateReport> out;
  const double gh = 0.5 * kp.gamma, s = kp.s;
  const auto fields = random_signed_fields(g, count, seed);
  auto mk = [&](const std::string& name, Tier tier) {
    EstimateReport r;
    r.name = name;
    r.tier = tier;
    r.seed = seed;
    r.n_samples = count;
    r.family = "signed band-limited fields";
    r.context["delta"] = num(dp.delta);
    r.context["eps"] = num(dp.eps);
    r.context["k"] = num(dp.k);
    r.context["n"] = std::to_string(g.n());
    return r;
  };
  const Decomposition dg = decompose_gaussian(g, kp, aq, dp);
  {
    const Decomposition& d = dg;
    EstimateReport rec = mk("gaussian_split_reconstruction", Tier::Exact);
    rec.stats["rel_defect"] = d.reconstruction_defect;
    rec.tolerances["rel"] = 1e-10;
    rec.pass = d.reconstruction_defect <= 1e-10;
    out.push_back(rec);
    RatioStats st;
    for (const auto& h : fields) {
      const double form = (h.cast<cd>().dot(d.second.a * h.cast<cd>())).real() * g.cell();
      st.add(form / sob2(g, h, s, gh));
    }
    EstimateReport r = mk("lambda_dissipativity", Tier::Fitted);
    r.stats["c"] = st.min;
    r.fitted = st.min;
    r.pass = st.finite() && st.min > 0.0;
    out.push_back(r);
  }
  {
    // Same partition in the <v>^k weight (decompose_polynomial without a second assembly).
    Decomposition d = dg;
    d.first = make_operator(g, dg.first.a.real(), WeightTag::Polynomial, dp.k, {0, 0, 0}, "A");
    d.second = make_operator(g, dg.second.a.real(), WeightTag::Polynomial, dp.k, {0, 0, 0}, "B");
    EstimateReport rec = mk("polynomial_split_reconstruction", Tier::Exact);
    rec.stats["rel_defect"] = d.reconstruction_defect;
    rec.tolerances["rel"] = 1e-10;
    rec.pass = d.reconstruction_defect <= 1e-10;
    out.push_back(rec);
    // The polynomial-weighted matrices act on w = <v>^k f, so the weighted form is <B w, w>.
    RatioStats st;
    for (const auto& w : fields) {
      const double form = (w.cast<cd>().dot(d.second.a * w.cast<cd>())).real() * g.cell();
      st.add(form / sob2(g, w, s, gh));
    }
    EstimateReport r = mk("b_dissipativity", Tier::Fitted);
    r.stats["c"] = st.min;
    r.stats["max_ratio"] = st.max;
    r.fitted = st.min;
    r.pass = st.finite() && st.min > 0.0;
    out.push_back(r);
    // |A h / sqrt(mu)|_2 <= C |<v>^k h|_2, i.e. the 2-norm of A_gauss diag(1 / scale).
    const Eigen::MatrixXd Ag = d.first.scale.asDiagonal().inverse() * d.first.a.real() *
                               d.first.scale.asDiagonal();
    const Eigen::MatrixXd T = Ag * d.first.scale.cwiseInverse().asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(T);
    EstimateReport b = mk("a_boundedness", Tier::Fitted);
    b.n_samples = 1;
    b.stats["operator_norm"] = svd.singularValues()[0];
    b.fitted = svd.singularValues()[0];
    b.pass = std::isfinite(svd.singularValues()[0]);
    out.push_back(b);
  }
  return out;
}

}  // namespace kgap
