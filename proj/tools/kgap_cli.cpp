#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kgap/checks.hpp"
#include "kgap/suites.hpp"

namespace fs = std::filesystem;
using namespace kgap;

namespace {

enum Exit { kPass = 0, kCheckFailure = 1, kUsage = 2, kAbort = 3 };

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::string> suite;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "flat JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "overrides the config seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--suite", c.suite, "exact | explicit | constants | fitted | all");
}

RunConfig resolve(const Common& c) {
  json j = json::object();
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InvalidArgument("config: " + c.config_path + ": not valid JSON");
    }
  }
  if (c.seed) j["seed"] = *c.seed;
  if (c.suite) j["suite"] = *c.suite;
  return parse_config(j);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + p.string());
}

std::string reports_csv(const std::vector<EstimateReport>& rs) {
  std::string s = "name,tier,pass,n_samples,bound,fitted\n";
  char buf[64];
  auto opt = [&](const std::optional<double>& x) {
    if (!x) return std::string();
    std::snprintf(buf, sizeof buf, "%.12e", *x);
    return std::string(buf);
  };
  for (const auto& r : rs)
    s += r.name + "," + to_string(r.tier) + "," + (r.pass ? "1" : "0") + "," +
         std::to_string(r.n_samples) + "," + opt(r.bound) + "," + opt(r.fitted) + "\n";
  return s;
}

int finish(const fs::path& dir, const std::string& command, const RunConfig& cfg,
           const std::vector<EstimateReport>& rs, json extra = json::object()) {
  json j = envelope(command, cfg.seed, cfg.to_json(), rs);
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_file(dir / (command + ".json"), dump(j));
  write_file(dir / (command + "_reports.csv"), reports_csv(rs));
  for (const auto& r : rs)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
  return all_pass(rs) ? kPass : kCheckFailure;
}

int cmd_collide(const RunConfig& cfg, const fs::path& dir) {
  const auto rs = collide_reports(cfg);
  const VelocityGrid g = build_grid(cfg.Lv, cfg.n);
  const AngularQuadrature aq = build_angular(cfg.kernel, cfg.n_theta, cfg.n_phi);
  const auto pair = smooth_pairs(g).front();
  const Eigen::VectorXd f = pair.first + pair.second;
  const Eigen::VectorXd q = q_direct_real(g, f, f, cfg.kernel, aq);
  std::string csv = "v1,v2,v3,f,q\n";
  char buf[160];
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 v = g.node(p);
    const auto i = static_cast<Eigen::Index>(p);
    std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e,%.12e,%.12e\n", v[0], v[1], v[2], f[i],
                  q[i]);
    csv += buf;
  }
  write_file(dir / "collide_q.csv", csv);
  return finish(dir, "collide", cfg, rs);
}

int cmd_spectrum(const RunConfig& cfg, const fs::path& dir) {
  const SpectrumOutput so = run_spectrum(cfg);
  std::ofstream os(dir / "spectrum.csv", std::ios::binary);
  write_spectrum_csv(os, so.rows);
  json extra;
  extra["gap"] = so.gap;
  return finish(dir, "spectrum", cfg, so.reports, extra);
}

int cmd_verify(const RunConfig& cfg, const fs::path& dir) {
  return finish(dir, "verify", cfg, run_suite(cfg.suite, cfg));
}

void write_trajectory(const fs::path& dir, const TrajectoryRecord& tr) {
  std::ofstream os(dir / "trajectory.csv", std::ios::binary);
  tr.write_csv(os);
}

int cmd_evolve(const RunConfig& cfg, const fs::path& dir) {
  try {
    const EvolveOutput eo = run_evolve(cfg);
    write_trajectory(dir, eo.trajectory);
    json extra;
    extra["summary"] = eo.summary;
    if (eo.picard) {
      extra["picard"] = eo.picard->table();
      std::string csv = "iteration,w_norm,ratio\n";
      char buf[96];
      for (std::size_t i = 0; i < eo.picard->w_norms.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12e,", i, eo.picard->w_norms[i]);
        csv += buf;
        if (i > 0) {
          std::snprintf(buf, sizeof buf, "%.12e", eo.picard->ratios[i - 1]);
          csv += buf;
        }
        csv += "\n";
      }
      write_file(dir / "picard.csv", csv);
    }
    return finish(dir, "evolve", cfg, eo.reports, extra);
  } catch (const EvolutionAbort& e) {
    write_trajectory(dir, *e.partial);
    json j = envelope("evolve", cfg.seed, cfg.to_json(), {});
    j["pass"] = false;
    j["aborted"] = e.what();
    j["summary"] = e.partial->summary();
    write_file(dir / "evolve.json", dump(j));
    throw;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgap: collision operator checks, spectra and perturbative dynamics"};
  app.require_subcommand(1);
  Common c;
  bool compare_fourier = false;
  auto* collide = app.add_subcommand("collide", "evaluate Q and check conservation");
  add_common(collide, c);
  collide->add_flag("--compare-fourier", compare_fourier, "add the q_fourier cross-check");
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the linearized operator");
  add_common(spectrum, c);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify, c);
  auto* evolve = app.add_subcommand("evolve", "linear, nonlinear or Picard evolution");
  add_common(evolve, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    RunConfig cfg = resolve(c);
    if (compare_fourier) cfg.compare_fourier = true;
    const fs::path dir(c.out);
    fs::create_directories(dir);
    if (*collide) return cmd_collide(cfg, dir);
    if (*spectrum) return cmd_spectrum(cfg, dir);
    if (*verify) return cmd_verify(cfg, dir);
    return cmd_evolve(cfg, dir);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
