#include "kgap/report.hpp"

#include <cmath>
#include <limits>

namespace kgap {

std::string to_string(Tier t) {
  switch (t) {
    case Tier::Exact: return "exact";
    case Tier::Explicit: return "explicit-constant";
    case Tier::Fitted: return "fitted-constant";
    case Tier::Diagnostic: return "diagnostic";
  }
  return "unknown";
}

namespace {
// JSON has no inf/nan; keep them readable as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}
}  // namespace

json EstimateReport::to_json() const {
  json j;
  j["name"] = name;
  j["tier"] = to_string(tier);
  j["seed"] = seed;
  j["n_samples"] = n_samples;
  j["family"] = family;
  json s = json::object();
  for (const auto& [k, v] : stats) s[k] = num(v);
  j["stats"] = s;
  j["bound"] = bound ? num(*bound) : json(nullptr);
  j["fitted"] = fitted ? num(*fitted) : json(nullptr);
  json t = json::object();
  for (const auto& [k, v] : tolerances) t[k] = num(v);
  j["tolerances"] = t;
  json c = json::object();
  for (const auto& [k, v] : context) c[k] = v;
  j["context"] = c;
  j["pass"] = pass;
  return j;
}

void RatioStats::add(double r) {
  if (count == 0) {
    min = max = r;
  } else {
    min = std::min(min, r);
    max = std::max(max, r);
  }
  ++count;
}

bool RatioStats::finite() const { return count > 0 && std::isfinite(min) && std::isfinite(max); }

json envelope(const std::string& command, std::uint64_t seed, const json& config,
              const std::vector<EstimateReport>& reports) {
  json j;
  j["schema"] = kSchema;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  json arr = json::array();
  bool all = true;
  for (const auto& r : reports) {
    arr.push_back(r.to_json());
    all = all && r.pass;
  }
  j["reports"] = arr;
  j["pass"] = all;
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace kgap
