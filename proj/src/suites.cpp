#include "kgap/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "kgap/checks.hpp"
#include "kgap/estimates.hpp"

namespace kgap {

namespace {

struct Wanted {
  bool exact = false, expl = false, constants = false, fitted = false;
  bool tier(Tier t) const {
    return (t == Tier::Exact && exact) || (t == Tier::Explicit && expl) ||
           (t == Tier::Fitted && fitted);
  }
};

class Collector {
 public:
  explicit Collector(Wanted w) : w_(w) {}
  void add(const EstimateReport& r) {
    if (w_.tier(r.tier)) out_.push_back(r);
  }
  void add(const std::vector<EstimateReport>& rs) {
    for (const auto& r : rs) add(r);
  }
  std::vector<EstimateReport>& out() { return out_; }

 private:
  Wanted w_;
  std::vector<EstimateReport> out_;
};

std::vector<double> constant_gammas(const RunConfig& cfg) {
  std::vector<double> g{0.5, 1.0};
  if (std::find(g.begin(), g.end(), cfg.kernel.gamma) == g.end()) g.push_back(cfg.kernel.gamma);
  return g;
}

void pointwise(const RunConfig& cfg, Collector& c) {
  const Sampling smp{cfg.seed, cfg.samples_pointwise};
  for (double k : {4.0, 6.0, 10.0}) c.add(verify_weight_expansion(k, smp));
  for (double k : {4.0, 6.0}) c.add(verify_weight_diff_bound(k, 0.5, smp));
  c.add(verify_convex_inequality({2.0, 5.0, 9.0}, 0.5, smp));
  c.add(verify_ukai({0.5, 1.0, 2.0}, {0.3, 0.7}, smp));
  MultiplierSymbol ms = cfg.evolution.multiplier;
  ms.s = cfg.kernel.s;
  c.add(multiplier_checks(ms, Sampling{cfg.seed, std::min<long>(cfg.samples_pointwise, 1000)}));
}

void constants(const RunConfig& cfg, Collector& c, bool all_tiers) {
  for (double g : constant_gammas(cfg)) {
    KernelParams kp = cfg.kernel;
    kp.gamma = g;
    auto rs = verify_constants(kp, cfg.k0);
    if (all_tiers)
      c.out().insert(c.out().end(), rs.begin(), rs.end());
    else
      c.add(rs);
  }
}

void identities(const RunConfig& cfg, Collector& c) {
  const KernelParams& kp = cfg.kernel;
  const VelocityGrid g = build_grid(4.0, 6);
  const AngularQuadrature aq = build_angular(kp, 8, 8);
  GaussianBump b;
  b.center = {0.5, 0.0, -0.3};
  b.var = 0.75;
  c.add(cancellation_check(g, maxwellian_values(g), b, kp, aq));
  GaussianBump F;
  F.center = {0.3, 0.2, 0.0};
  const Vec3 p{0.1, -0.4, 0.2};
  c.add(change_of_variables_check(F, p, kp, aq, false, 1e-4));
  KernelParams k2 = kp;
  k2.theta_min = std::max(kp.theta_min, 0.2);
  c.add(change_of_variables_check(F, p, k2, build_angular(k2, 8, 8), true, 1e-6));
  const VelocityGrid g8 = build_grid(5.0, 8);
  c.add(j1_fourier_identity(g8, b, build_angular(kp, 6, 8)));
}

void fields(const RunConfig& cfg, Collector& c, const Wanted& w) {
  const KernelParams& kp = cfg.kernel;
  const VelocityGrid g = build_grid(cfg.Lv_field_check, cfg.n_field_check);
  const AngularQuadrature aq = build_angular(kp, cfg.n_theta, cfg.n_phi);
  if (w.expl) c.add(verify_pos_neg_sandwich(g, kp.s, cfg.samples_fields, cfg.seed));
  if (w.exact) c.add(verify_split_partition(g, kp, aq, cfg.split_R));
  if (w.exact || w.fitted)
    c.add(verify_decompositions(g, kp, aq, cfg.decomposition, cfg.family_random,
                                cfg.seed));
  if (!w.fitted) return;
  FieldContext ctx{g, kp, aq, build_test_family(g, cfg.family_random, cfg.seed)};
  c.add(verify_coercivity(ctx));
  c.add(verify_trilinear(ctx, cfg.family_random, cfg.seed));
  c.add(verify_j1_family(ctx));
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"exact", "explicit", "constants", "fitted", "all"};
  return names;
}

std::vector<EstimateReport> run_suite(const std::string& name, const RunConfig& cfg) {
  cfg.validate();
  Wanted w;
  if (name == "exact") w.exact = true;
  else if (name == "explicit") w.expl = true;
  else if (name == "constants") w.constants = true;
  else if (name == "fitted") w.fitted = true;
  else if (name == "all") w = {true, true, true, true};
  else throw InvalidArgument("suite: unknown name '" + name + "'");

  Collector c(w);
  if (w.exact || w.expl || w.fitted) pointwise(cfg, c);
  if (w.expl || w.constants) constants(cfg, c, w.constants);
  if (w.exact) identities(cfg, c);
  if (w.exact || w.expl || w.fitted) fields(cfg, c, w);
  return c.out();
}

std::vector<EstimateReport> collide_reports(const RunConfig& cfg) {
  cfg.validate();
  const VelocityGrid g = build_grid(cfg.Lv, cfg.n);
  const AngularQuadrature aq = build_angular(cfg.kernel, cfg.n_theta, cfg.n_phi);
  std::vector<EstimateReport> out;
  out.push_back(equilibrium_check(g, cfg.kernel, aq));
  for (const auto& [f, h] : smooth_pairs(g)) {
    auto r = conservation_check(g, f + h, cfg.kernel, aq);
    r.name += "_pair" + std::to_string(out.size());
    out.push_back(r);
  }
  if (cfg.compare_fourier) {
    CrossOracleParams cp;
    cp.Lv = cfg.Lv;
    cp.n_coarse = cfg.n;
    cp.n_fine = 2 * cfg.n;
    out.push_back(cross_oracle_check(cfg.kernel, SplitParams{cfg.split_R}, cfg.n_theta,
                                     cfg.n_phi, cp));
  }
  return out;
}

EvolutionConfig evolution_config(const RunConfig& cfg) {
  EvolutionConfig ec = cfg.evolution;
  ec.y = cfg.y;
  ec.k0 = cfg.k0;
  ec.k_weight = cfg.weight_k;
  ec.multiplier.s = cfg.kernel.s;
  return ec;
}

namespace {

std::string mode_label(const Mode& l) {
  return std::to_string(l[0]) + "_" + std::to_string(l[1]) + "_" + std::to_string(l[2]);
}

std::vector<WeightTag> weights_of(const RunConfig& cfg) {
  if (cfg.weight == "both") return {WeightTag::Gaussian, WeightTag::Polynomial};
  return {weight_tag_from(cfg.weight)};
}

EstimateReport spectrum_report(const Spectrum& sp, const Mode& l, WeightTag w, double k) {
  EstimateReport r;
  r.name = "spectrum_l" + mode_label(l) + "_" + to_string(w);
  r.tier = Tier::Exact;
  r.n_samples = static_cast<long>(sp.values.size());
  r.family = "dense operator";
  r.stats["cluster_dim"] = sp.cluster_dim;
  r.stats["cluster_tol"] = sp.tol;
  r.stats["invariant_residual"] = sp.residual;
  r.stats["gap"] = sp.gap;
  r.stats["hermitian_defect"] = sp.hermitian_defect;
  r.stats["max_imag"] = sp.max_imag;
  r.context["weight"] = to_string(w);
  if (w == WeightTag::Polynomial) r.context["weight_k"] = std::to_string(k);
  if (l == Mode{0, 0, 0}) {
    r.stats["principal_angle_rad"] = sp.principal_angle;
    r.tolerances["principal_angle_rad"] = 1e-2;
    r.pass = sp.cluster_dim == 5 && sp.principal_angle < 1e-2 && sp.gap > 0.0;
  } else {
    r.pass = sp.gap > 0.0;
  }
  return r;
}

}  // namespace

SpectrumOutput run_spectrum(const RunConfig& cfg) {
  cfg.validate();
  const VelocityGrid g = build_grid(cfg.Lv, cfg.n);
  const AngularQuadrature aq = build_angular(cfg.kernel, cfg.n_theta, cfg.n_phi);
  AssemblyOptions opt;
  opt.max_n = std::max(opt.max_n, cfg.n);
  const Eigen::MatrixXd Lg = assemble_L(g, cfg.kernel, aq, WeightTag::Gaussian, 0.0, {0, 0, 0}, opt)
                                 .a.real();
  SpectrumOutput out;
  for (const Mode& l : cfg.spectrum_modes)
    for (WeightTag w : weights_of(cfg)) {
      const double k = w == WeightTag::Polynomial ? cfg.weight_k : 0.0;
      const OperatorMatrix op = make_operator(g, Lg, w, k, l, "L");
      const Spectrum sp = spectrum(g, op, l == Mode{0, 0, 0});
      for (Eigen::Index i = 0; i < sp.values.size(); ++i)
        out.rows.push_back({l, to_string(w), static_cast<int>(i), sp.values[i].real(),
                            sp.values[i].imag(), static_cast<bool>(sp.cluster[i])});
      out.reports.push_back(spectrum_report(sp, l, w, k));
      if (l == Mode{0, 0, 0} && w == WeightTag::Gaussian) out.gap = sp.gap;
    }
  return out;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  os << "l1,l2,l3,weight,index,re,im,cluster\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12e,%.12e", r.re, r.im);
    os << r.mode[0] << ',' << r.mode[1] << ',' << r.mode[2] << ',' << r.weight << ',' << r.index
       << ',' << buf << ',' << (r.cluster ? 1 : 0) << '\n';
  }
}

DistributionField initial_state(const RunConfig& cfg, const VelocityGrid& g) {
  if (cfg.initial == "zero") return DistributionField(g);
  if (cfg.initial == "rough") {
    RoughParams rp;
    rp.seed = cfg.seed;
    return rough_initial(g, cfg.k0, cfg.kernel.s, rp);
  }
  DistributionField f = small_perturbation(g, cfg.f0_y_norm, cfg.y, cfg.seed);
  if (cfg.initial == "homogeneous") {
    DistributionField h(g);
    h[{0, 0, 0}] = f.get({0, 0, 0});
    const double n = y_l_norm(h, cfg.y);
    return n > 0.0 ? cd(cfg.f0_y_norm / n) * h : h;
  }
  return f;
}

namespace {

// Slowest decay rate among the modes present in f: the gap at l = 0, -abscissa elsewhere.
double slowest_rate(const DistributionField& f, const LinearModel& m) {
  double rate = std::numeric_limits<double>::infinity();
  for (const auto& [l, v] : f.modes) {
    if (v.cwiseAbs().maxCoeff() == 0.0) continue;
    rate = std::min(rate, l == Mode{0, 0, 0} ? m.gap() : -m.abscissa(l));
  }
  return rate;
}

EstimateReport moment_report(const TrajectoryRecord& tr) {
  EstimateReport r;
  r.name = "moment_drift";
  r.tier = Tier::Exact;
  r.n_samples = static_cast<long>(tr.times.size());
  r.family = "trajectory records";
  r.stats["drift"] = tr.moment_drift();
  r.tolerances["drift"] = 1e-6;
  r.pass = tr.moment_drift() < 1e-6;
  return r;
}

double relative_y_difference(const DistributionField& a, const DistributionField& b,
                             const YNorm& y) {
  const double n = y_l_norm(b, y);
  return n > 0.0 ? y_l_norm(a - b, y) / n : y_l_norm(a - b, y);
}

}  // namespace

EvolveOutput run_evolve(const RunConfig& cfg) {
  cfg.validate();
  const EvolutionConfig ec = evolution_config(cfg);
  const VelocityGrid g = build_grid(cfg.Lv, cfg.n);
  const AngularQuadrature aq = build_angular(cfg.kernel, cfg.n_theta, cfg.n_phi);
  AssemblyOptions opt;
  opt.max_n = std::max(opt.max_n, cfg.n);
  const LinearModel m = LinearModel::assemble(g, cfg.kernel, aq, opt);
  const DistributionField f0 = initial_state(cfg, g);
  const double rate = slowest_rate(f0, m);

  EvolveOutput out;
  json& s = out.summary;
  s["evolve_mode"] = cfg.evolve_mode;
  s["initial"] = cfg.initial;
  s["gap_l0"] = m.gap();
  s["cluster_dim_l0"] = m.cluster_dim();
  s["spectral_radius"] = m.spectral_radius();
  s["reference_rate"] = std::isfinite(rate) ? json(rate) : json(nullptr);

  if (cfg.evolve_mode == "linear") {
    out.trajectory = evolve_linear(f0, m, cfg.kernel, ec);
    const auto& tr = out.trajectory;
    EstimateReport r;
    r.name = "linear_decay_rate";
    r.tier = Tier::Fitted;
    r.n_samples = static_cast<long>(tr.times.size());
    r.family = cfg.initial;
    const double fit = tail_decay_rate(tr.times, tr.y_norm);
    r.stats["fitted_rate"] = fit;
    r.stats["reference_rate"] = rate;
    r.fitted = fit;
    r.tolerances["relative"] = 0.1;
    r.pass = std::isfinite(rate) && std::abs(fit - rate) <= 0.1 * rate;
    out.reports.push_back(r);
  } else if (cfg.evolve_mode == "nonlinear") {
    out.trajectory = evolve_nonlinear(f0, m, cfg.kernel, aq, ec);
    const auto& tr = out.trajectory;
    EstimateReport r;
    r.name = "nonlinear_decay_bound";
    r.tier = Tier::Exact;
    r.n_samples = static_cast<long>(tr.times.size());
    r.family = cfg.initial;
    const double bound = std::exp(-0.5 * rate * tr.times.back()) * tr.y_norm.front();
    r.stats["y_norm_initial"] = tr.y_norm.front();
    r.stats["y_norm_final"] = tr.y_norm.back();
    r.stats["reference_rate"] = rate;
    r.bound = bound;
    r.pass = std::isfinite(rate) && tr.y_norm.back() <= bound;
    out.reports.push_back(r);
  } else {
    PicardResult pr = picard_solve(f0, m, cfg.kernel, aq, ec);
    const TrajectoryRecord direct = evolve_nonlinear(f0, m, cfg.kernel, aq, ec);
    EstimateReport c;
    c.name = "picard_contraction";
    c.tier = Tier::Exact;
    c.n_samples = pr.iterations;
    c.family = cfg.initial;
    double worst = 0.0;
    for (double x : pr.ratios) worst = std::max(worst, x);
    c.stats["iterations"] = pr.iterations;
    c.stats["max_ratio"] = worst;
    c.stats["converged"] = pr.converged ? 1.0 : 0.0;
    c.tolerances["ratio"] = 1.0;
    c.pass = pr.converged && worst < 1.0;
    EstimateReport d;
    d.name = "picard_vs_direct";
    d.tier = Tier::Exact;
    d.n_samples = 1;
    d.family = cfg.initial;
    const double diff =
        relative_y_difference(pr.trajectory.final_state, direct.final_state, cfg.y);
    d.stats["relative_y_difference"] = diff;
    d.tolerances["relative_y_difference"] = 1e-5;
    d.context["t"] = std::to_string(direct.times.back());
    d.pass = diff <= 1e-5;
    out.reports.push_back(c);
    out.reports.push_back(d);
    out.trajectory = pr.trajectory;
    out.picard = std::move(pr);
  }
  out.reports.push_back(moment_report(out.trajectory));
  out.reports.push_back(positivity_monitor(out.trajectory));
  s["trajectory"] = out.trajectory.summary();
  return out;
}

bool all_pass(const std::vector<EstimateReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

}  // namespace kgap
