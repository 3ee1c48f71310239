#pragma once
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kgap/config.hpp"
#include "kgap/dynamics.hpp"
#include "kgap/report.hpp"

namespace kgap {

// exact, explicit, constants, fitted, all
const std::vector<std::string>& suite_names();

// Deterministic for a given config (every random draw is keyed by cfg.seed).
std::vector<EstimateReport> run_suite(const std::string& name, const RunConfig& cfg);

// Conservation and equilibrium on the configured grid; the cross-oracle section is added
// when cfg.compare_fourier is set.
std::vector<EstimateReport> collide_reports(const RunConfig& cfg);

// Evolution settings with the shared fields (Y norm, k0, weight, s) copied in.
EvolutionConfig evolution_config(const RunConfig& cfg);

struct SpectrumRow {
  Mode mode{0, 0, 0};
  std::string weight;
  int index = 0;
  double re = 0.0, im = 0.0;
  bool cluster = false;
};
struct SpectrumOutput {
  std::vector<SpectrumRow> rows;
  std::vector<EstimateReport> reports;
  double gap = 0.0;  // l = 0 gap in the Gaussian weight, 0 when that mode was not requested
};
// One report per (mode, weight). At l = 0: five eigenvalues inside the tolerance ball with
// the collision invariants as eigenspace, everything else strictly in the left half plane.
SpectrumOutput run_spectrum(const RunConfig& cfg);
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows);

// Initial perturbation f0 (f-coordinates) for cfg.initial.
DistributionField initial_state(const RunConfig& cfg, const VelocityGrid& g);

struct EvolveOutput {
  TrajectoryRecord trajectory;
  std::optional<PicardResult> picard;
  std::vector<EstimateReport> reports;
  json summary;
};
// Linear, nonlinear or Picard run per cfg.evolve_mode. Throws EvolutionAbort on blow-up.
EvolveOutput run_evolve(const RunConfig& cfg);

bool all_pass(const std::vector<EstimateReport>& reports);

}  // namespace kgap
