// Acceptance run: one PASS/FAIL line per criterion. The exit status is 0 when every failure
// is one of the known-unattainable criteria (see README), 1 otherwise.
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "kgap/checks.hpp"
#include "kgap/suites.hpp"

using namespace kgap;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Options {
  bool full = false;
  std::set<int> only;
  std::string baselines;
  bool pin = false;
  std::string out = "acceptance_out";
};

struct Shared {
  RunConfig cfg;
  std::vector<EstimateReport> exact, expl, fitted;
  double t_exact = 0.0, t_expl = 0.0, t_fitted = 0.0;
  bool have_exact = false, have_expl = false, have_fitted = false;
  double lambda_fit = 0.0;
};

std::string failures(const std::vector<EstimateReport>& rs) {
  std::string s;
  for (const auto& r : rs)
    if (!r.pass) s += (s.empty() ? "" : ",") + r.name;
  return s.empty() ? "none" : s;
}

Outcome suite_criterion(const std::vector<EstimateReport>& rs, double t, double budget) {
  Outcome o;
  o.pass = all_pass(rs) && t < budget;
  o.detail = std::to_string(rs.size()) + " reports, failed: " + failures(rs) + ", " +
             fmt("%.1f", t) + " s (budget " + fmt("%.0f", budget) + " s)";
  return o;
}

void ensure_exact(Shared& sh) {
  if (sh.have_exact) return;
  const auto t0 = Clock::now();
  sh.exact = run_suite("exact", sh.cfg);
  sh.t_exact = seconds_since(t0);
  sh.have_exact = true;
}

void ensure_explicit(Shared& sh) {
  if (sh.have_expl) return;
  const auto t0 = Clock::now();
  sh.expl = run_suite("explicit", sh.cfg);
  sh.t_expl = seconds_since(t0);
  sh.have_expl = true;
}

void ensure_fitted(Shared& sh) {
  if (sh.have_fitted) return;
  const auto t0 = Clock::now();
  sh.fitted = run_suite("fitted", sh.cfg);
  sh.t_fitted = seconds_since(t0);
  sh.have_fitted = true;
}

Outcome criterion1(Shared& sh, const Options&) {
  ensure_exact(sh);
  return suite_criterion(sh.exact, sh.t_exact, 60.0);
}

Outcome criterion2(Shared& sh, const Options&) {
  ensure_explicit(sh);
  return suite_criterion(sh.expl, sh.t_expl, 120.0);
}

Outcome criterion3(Shared& sh, const Options&) {
  const auto t0 = Clock::now();
  const VelocityGrid g = build_grid(8.0, 16);
  const AngularQuadrature aq = build_angular(sh.cfg.kernel, sh.cfg.n_theta, sh.cfg.n_phi);
  const auto eq = equilibrium_check(g, sh.cfg.kernel, aq, 1e-6);
  const auto pair = smooth_pairs(g).back();
  const auto co = conservation_check(g, pair.first + pair.second, sh.cfg.kernel, aq, 1e-8);
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = eq.pass && co.pass && t < 60.0;
  o.detail = "weak moments/|f|^2 " + fmt("%.2e", co.stats.at("weak_max_over_norm2")) +
             ", |Q(mu,mu)|/|mu| " + fmt("%.2e", eq.stats.at("q_over_mu")) + ", " +
             fmt("%.1f", t) + " s";
  return o;
}

Outcome criterion4(Shared& sh, const Options& opt) {
  const auto t0 = Clock::now();
  CrossOracleParams cp;
  cp.Lv = 8.0;
  if (!opt.full) cp.n_fine = 0;
  const auto r = cross_oracle_check(sh.cfg.kernel, SplitParams{sh.cfg.split_R}, sh.cfg.n_theta,
                                    sh.cfg.n_phi, cp);
  const double t = seconds_since(t0);
  Outcome o;
  std::string errs;
  bool coarse_ok = true;
  for (int i = 1; i <= 3; ++i) {
    const double e = r.stats.at("pair" + std::to_string(i) + "_rel_l2_n16");
    coarse_ok = coarse_ok && e < cp.tol;
    errs += (i > 1 ? " " : "") + fmt("%.2e", e);
  }
  o.detail = "n=16 rel L2 errors " + errs;
  if (opt.full) {
    std::string ratios;
    for (int i = 1; i <= 3; ++i)
      ratios += (i > 1 ? " " : "") + fmt("%.1f", r.stats.at("pair" + std::to_string(i) + "_ratio"));
    o.detail += ", ratios 16/32 " + ratios;
    o.pass = r.pass && t < 300.0;
  } else {
    // The n = 32 level (about 160 s per pair) cannot change a failed n = 16 verdict.
    o.detail += coarse_ok ? ", n=32 level needs --full" : ", n=32 level skipped";
    o.pass = false;
  }
  o.detail += ", " + fmt("%.1f", t) + " s";
  return o;
}

Outcome criterion5(Shared& sh, const Options&) {
  const auto t0 = Clock::now();
  RunConfig c = sh.cfg;
  c.n = 10;
  c.spectrum_modes = {{0, 0, 0}};
  c.weight = "gaussian";
  const SpectrumOutput so = run_spectrum(c);
  const double t = seconds_since(t0);
  const auto& r = so.reports.front();
  sh.lambda_fit = so.gap;
  Outcome o;
  o.pass = r.pass && so.gap > 0.0 && t < 600.0;
  o.detail = "cluster " + fmt("%.0f", r.stats.at("cluster_dim")) + ", angle " +
             fmt("%.2e", r.stats.at("principal_angle_rad")) + ", lambda_fit " +
             fmt("%.4f", so.gap) + ", " + fmt("%.1f", t) + " s";
  return o;
}

Outcome criterion6(Shared& sh, const Options& opt) {
  if (!(sh.lambda_fit > 0.0)) criterion5(sh, opt);
  const auto t0 = Clock::now();
  RunConfig c = sh.cfg;
  c.n = 10;
  c.initial = "homogeneous";
  c.f0_y_norm = 1e-3;
  c.evolve_mode = "linear";
  const EvolveOutput lin = run_evolve(c);
  const double slope = lin.reports.front().stats.at("fitted_rate");
  const bool slope_ok = std::abs(slope - sh.lambda_fit) <= 0.1 * sh.lambda_fit;
  c.evolve_mode = "nonlinear";
  const EvolveOutput nl = run_evolve(c);
  const auto& tr = nl.trajectory;
  const double bound = std::exp(-0.5 * sh.lambda_fit * 5.0) * tr.y_norm.front();
  const bool decay_ok = tr.y_norm.back() <= bound;
  const bool drift_ok = tr.moment_drift() < 1e-6;
  const auto pos = positivity_monitor(tr);
  Outcome o;
  o.detail = "slope " + fmt("%.3f", slope) + " vs " + fmt("%.3f", sh.lambda_fit) + ", |f(5)| " +
             fmt("%.2e", tr.y_norm.back()) + " <= " + fmt("%.2e", bound) + ", drift " +
             fmt("%.1e", tr.moment_drift()) + ", min F/max F " +
             fmt("%.1e", pos.stats.at("min_F_over_max_F"));
  if (opt.full) {
    // Diagnostic: x-dependent data decays at the slowest mode's rate, not at lambda_fit.
    c.initial = "perturbation";
    const EvolveOutput xd = run_evolve(c);
    o.detail += ", x-dependent run " + std::string(xd.reports.front().pass ? "within" : "outside") +
                " its mode bound";
  }
  const double t = seconds_since(t0);
  o.pass = slope_ok && decay_ok && drift_ok && pos.pass && t < 600.0;
  o.detail += ", " + fmt("%.1f", t) + " s";
  return o;
}

Outcome criterion7(Shared& sh, const Options&) {
  const auto t0 = Clock::now();
  RunConfig c = sh.cfg;
  c.n = 8;
  c.initial = "perturbation";
  c.f0_y_norm = 1e-3;
  c.evolve_mode = "picard";
  c.evolution.t_end = 1.0;
  c.evolution.T0 = 0.5;
  const EvolveOutput eo = run_evolve(c);
  const double t = seconds_since(t0);
  double worst = 0.0;
  for (double x : eo.picard->ratios) worst = std::max(worst, x);
  double diff = 0.0;
  bool ok = true;
  for (const auto& r : eo.reports) {
    if (r.name == "picard_vs_direct") diff = r.stats.at("relative_y_difference");
    if (r.name == "picard_contraction" || r.name == "picard_vs_direct") ok = ok && r.pass;
  }
  Outcome o;
  o.pass = ok && t < 600.0;
  o.detail = std::to_string(eo.picard->iterations) + " iterations, max ratio " +
             fmt("%.3f", worst) + ", |limit - direct|/|direct| " + fmt("%.1e", diff) + ", " +
             fmt("%.1f", t) + " s";
  return o;
}

std::size_t physical_memory() {
  const long pages = sysconf(_SC_PHYS_PAGES), size = sysconf(_SC_PAGE_SIZE);
  return pages > 0 && size > 0 ? static_cast<std::size_t>(pages) * size : 0;
}

Outcome criterion8(Shared& sh, const Options& opt) {
  const auto t0 = Clock::now();
  // Preflight: dense model cost at the coarse reference grid, projected to n = 16 and 24.
  const VelocityGrid g8 = build_grid(5.0, 8);
  const AngularQuadrature aq = build_angular(sh.cfg.kernel, 8, 8);
  const auto tc = Clock::now();
  const LinearModel m8 = LinearModel::assemble(g8, sh.cfg.kernel, aq);
  const double t8 = seconds_since(tc);
  const double budget = 900.0;
  auto project = [&](int n) { return t8 * std::pow(n / 8.0, 6); };
  // Generator, propagator and eigenvectors per mode, three modes: about 6 dense n^3 x n^3 arrays.
  auto bytes = [](int n) { return 6.0 * 16.0 * std::pow(double(n), 6); };
  const double mem = double(physical_memory());
  const bool feasible = project(16) + project(24) < budget && bytes(24) < mem;
  Outcome o;
  o.detail = "preflight: n=16 " + fmt("%.0f", project(16)) + " s, n=24 " +
             fmt("%.0f", project(24)) + " s and " + fmt("%.1f", bytes(24) / 1e9) + " GB (have " +
             fmt("%.1f", mem / 1e9) + " GB)";
  if (feasible || opt.full) {
    RegularizationSetup st;
    if (feasible) {
      st.n_coarse = 16;
      st.n_fine = 24;
    }
    std::vector<RegularizationRun> runs;
    const auto r = regularization_experiment(st, sh.cfg.kernel, evolution_config(sh.cfg), &runs);
    o.detail += ", pair " + std::to_string(st.n_coarse) + "->" + std::to_string(st.n_fine) +
                ": grid change " + fmt("%.2f", r.stats.at("grid_change")) + ", roughness change " +
                fmt("%.3f", r.stats.at("roughness_change")) + ", tail deviation " +
                fmt("%.3f", r.stats.at("tail_rate_deviation"));
    o.pass = feasible && r.pass;
  } else {
    o.detail += ", reduced pair 8->10 needs --full";
    o.pass = false;
  }
  o.detail += ", " + fmt("%.1f", seconds_since(t0)) + " s";
  return o;
}

json load_baselines(const std::string& path) {
  std::ifstream in(path);
  if (!in) return json();
  json j;
  in >> j;
  return j;
}

Outcome criterion9(Shared& sh, const Options& opt) {
  ensure_fitted(sh);
  json current = json::object();
  for (const auto& r : sh.fitted)
    if (r.fitted) current[r.name] = *r.fitted;
  Outcome o;
  bool structural = all_pass(sh.fitted) && sh.t_fitted < 600.0;
  json base = opt.pin ? json() : load_baselines(opt.baselines);
  if (base.is_null()) {
    std::ofstream os(opt.baselines);
    os << dump(current);
    o.pass = structural;
    o.detail = "pinned " + std::to_string(current.size()) + " fitted values";
  } else {
    double worst = 0.0;
    std::string off;
    for (auto& [name, v] : current.items()) {
      if (!base.contains(name)) {
        off += " " + name + "(missing)";
        continue;
      }
      const double b = base[name].get<double>(), x = v.get<double>();
      const double rel = std::abs(x - b) / std::max(std::abs(b), 1e-300);
      worst = std::max(worst, rel);
      if (rel > 0.2) off += " " + name;
    }
    o.pass = structural && off.empty();
    o.detail = std::to_string(current.size()) + " fitted values, worst drift " +
               fmt("%.3f", worst) + (off.empty() ? "" : ", outside 20%:" + off);
  }
  o.detail += ", failed: " + failures(sh.fitted) + ", " + fmt("%.1f", sh.t_fitted) + " s";
  return o;
}

Outcome criterion10(Shared& sh, const Options&) {
  RunConfig c = sh.cfg;
  c.seed = 7;
  c.suite = "all";
  auto once = [&] { return dump(envelope("verify", c.seed, c.to_json(), run_suite("all", c))); };
  const auto t0 = Clock::now();
  const std::string a = once(), b = once();
  Outcome o;
  o.pass = a == b;
  o.detail = std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different") + ", " +
             fmt("%.1f", seconds_since(t0)) + " s";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Options opt;
  std::vector<int> only;
  app.add_flag("--full", opt.full, "also run the long diagnostic legs");
  app.add_option("--only", only, "criteria to run (default all)");
  app.add_option("--baselines", opt.baselines, "fitted-constant baseline file")->required();
  app.add_flag("--pin", opt.pin, "overwrite the baselines with this run");
  CLI11_PARSE(app, argc, argv);
  opt.only.insert(only.begin(), only.end());

  const std::set<int> expected_failures{4, 8};
  const std::vector<std::pair<std::string, std::function<Outcome(Shared&, const Options&)>>> all{
      {"exact identities", criterion1},     {"explicit constants", criterion2},
      {"conservation", criterion3},         {"cross-oracle", criterion4},
      {"spectral structure", criterion5},   {"decay consistency", criterion6},
      {"Picard contraction", criterion7},   {"regularization", criterion8},
      {"fitted regressions", criterion9},   {"determinism", criterion10}};
  Shared sh;
  bool unexpected = false;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!opt.only.empty() && !opt.only.count(id)) continue;
    Outcome o;
    try {
      o = all[i].second(sh, opt);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    const bool known = expected_failures.count(id) > 0;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << all[i].first
              << ": " << o.detail << (!o.pass && known ? " [known]" : "") << std::endl;
    if (!o.pass && !known) unexpected = true;
  }
  return unexpected ? 1 : 0;
}
