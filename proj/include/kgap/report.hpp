#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace kgap {

using json = nlohmann::json;

inline constexpr const char* kSchema = "kinetic-gap/report-v1";

enum class Tier { Exact, Explicit, Fitted, Diagnostic };
std::string to_string(Tier t);

// One verified identity or inequality.
struct EstimateReport {
  std::string name;
  Tier tier = Tier::Exact;
  std::uint64_t seed = 0;
  long n_samples = 0;
  std::string family;
  std::map<std::string, double> stats;
  std::optional<double> bound;   // explicit constant, when there is one
  std::optional<double> fitted;  // fitted constant, when there is one
  std::map<std::string, double> tolerances;
  std::map<std::string, std::string> context;
  bool pass = false;

  json to_json() const;
};

// Min/max ratio tracker used by the fitted-constant checks.
struct RatioStats {
  double min = 0.0, max = 0.0;
  long count = 0;
  void add(double r);
  bool finite() const;
};

json envelope(const std::string& command, std::uint64_t seed, const json& config,
              const std::vector<EstimateReport>& reports);

// Fixed formatting so identical runs give identical bytes.
std::string dump(const json& j);

}  // namespace kgap
