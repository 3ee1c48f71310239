#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "kgap/collision.hpp"
#include "kgap/dynamics.hpp"
#include "kgap/grids.hpp"
#include "kgap/linearized.hpp"
#include "kgap/report.hpp"

namespace kgap {

// Flat JSON configuration. Keys with a physical unit carry it in the name (theta_min_rad);
// time and velocity are dimensionless. Unknown keys are rejected.
struct RunConfig {
  KernelParams kernel{};
  double Lv = 5.0;
  int n = 10;
  int n_theta = 8;
  int n_phi = 8;
  double split_R = 2.0;
  DecompositionParams decomposition{};
  YNorm y{3.0, 2.5};
  int k0 = 22;
  EvolutionConfig evolution{};
  std::string evolve_mode = "linear";  // linear | nonlinear | picard
  std::string initial = "perturbation";  // zero | perturbation | homogeneous | rough
  double f0_y_norm = 1e-3;
  std::vector<Mode> spectrum_modes{{0, 0, 0}};
  std::string weight = "gaussian";  // gaussian | polynomial | both
  double weight_k = 4.0;
  bool compare_fourier = false;
  std::string suite = "all";
  long samples_pointwise = 10000;
  int samples_fields = 200;
  int family_random = 20;
  int n_field_check = 10;
  double Lv_field_check = 5.0;
  std::uint64_t seed = 7;

  void validate() const;
  double l0() const;  // smallest integer with (37 + 5 gamma) / (2 m0) <= l0
  json to_json() const;
};

// Parse and validate; errors name the offending key.
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);

}  // namespace kgap
